#pragma once
/// @file scenarios.hpp
/// @brief Problem definitions for the four numerical examples, manufactured
/// forcing, well models, constitutive laws and the stand-in input data.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cda/errors.hpp"
#include "cda/mesh.hpp"
#include "cda/observation.hpp"
#include "cda/pressure.hpp"
#include "cda/raster.hpp"

#ifndef CDA_DEFAULT_DATA_DIR
#define CDA_DEFAULT_DATA_DIR "data"
#endif

namespace cda {

enum class VelocityModel { prescribed, darcy };
enum class InitialPolicy { zero, interpolated };

using VelocityFn = std::function<Vec2(Point, double theta)>;

/// Smooth compactly supported well: peak * (1 - r^2/R^2)^2 inside radius R.
struct Well {
  Point center;
  double radius = 0.0;
  double peak = 0.0;

  double operator()(const Point& x) const {
    const double dx = x.x - center.x, dy = x.y - center.y;
    const double s = (dx * dx + dy * dy) / (radius * radius);
    return s < 1.0 ? peak * (1.0 - s) * (1.0 - s) : 0.0;
  }
  /// Exact integral over the plane: peak * pi R^2 / 3.
  double total() const { return peak * std::numbers::pi * radius * radius / 3.0; }
};

/// Assumptions A1..A7 recorded per scenario; nullopt means not applicable.
struct AssumptionFlags {
  std::array<std::optional<bool>, 7> holds{};
  std::array<std::string, 7> note{};
};

struct Scenario {
  std::string name;
  double lx = 1.0, ly = 1.0;
  std::size_t nx = 10, ny = 10;
  BoundarySpec boundary = BoundarySpec::all_dirichlet();

  ScalarFn diffusion;
  double d_lower = 0.0, d_upper = 0.0; // bounds D_* < D <= D^*

  VelocityModel velocity_model = VelocityModel::darcy;
  VelocityFn prescribed_velocity; // prescribed model only
  MobilityFn mobility;            // darcy model only
  ScalarFn pressure_source;       // g
  ScalarFn pressure_dirichlet = nullptr;
  /// Velocity computed once before time marching (theta-independent kappa).
  bool velocity_once = false;

  ScalarFn reaction = nullptr;       // q
  SpaceTimeFn source = nullptr;      // f
  SpaceTimeFn theta_dirichlet = nullptr;
  ScalarFn theta0;                   // true initial condition
  SpaceTimeFn exact = nullptr;       // analytic solution, when known

  double t_end = 1.0;
  double coarse_dt = 0.1;
  std::size_t fine_per_coarse = 1;

  double mu = 1.0;
  double hbar = 0.1;
  FunctionalKind functional = FunctionalKind::point_value;
  InitialPolicy initial = InitialPolicy::zero;

  AssumptionFlags assumptions;
  bool stand_in_data = false;
  std::string provenance;

  StructuredMesh mesh() const { return build_mesh(nx, ny, lx, ly, boundary); }
  double fine_dt() const { return coarse_dt / static_cast<double>(fine_per_coarse); }
  std::size_t num_coarse() const {
    return static_cast<std::size_t>(std::llround(t_end / coarse_dt));
  }
};

// ---------------------------------------------------------------------------
// Manufactured forcing
// ---------------------------------------------------------------------------

/// Closed-form solution theta(x, t) with its derivatives.
struct ManufacturedSolution {
  SpaceTimeFn value;
  SpaceTimeFn time_derivative;
  std::function<Vec2(Point, double)> gradient;
  SpaceTimeFn laplacian;
};

/// Velocity with its divergence, both as closed forms in (x, t).
struct VelocityExpr {
  std::function<Vec2(Point, double)> value;
  SpaceTimeFn divergence;
};

/// f = theta_t - D lap theta + div(v theta) + q theta with constant D.
inline SpaceTimeFn manufactured_forcing(ManufacturedSolution s, VelocityExpr v, double D,
                                        ScalarFn q = nullptr) {
  return [=](Point x, double t) {
    const double th = s.value(x, t);
    double f = s.time_derivative(x, t) - D * s.laplacian(x, t);
    if (v.value) f += dot(v.value(x, t), s.gradient(x, t)) + th * v.divergence(x, t);
    if (q) f += q(x) * th;
    return f;
  };
}

inline double example1_velocity(double theta) { return 1.0 / (1.0 + theta); }

inline ManufacturedSolution example1_solution() {
  const auto X = [](double x) { return x - x * x; };
  ManufacturedSolution s;
  s.value = [=](Point p, double t) { return X(p.x) * X(p.y) * std::exp(-t); };
  s.time_derivative = [=](Point p, double t) { return -X(p.x) * X(p.y) * std::exp(-t); };
  s.gradient = [=](Point p, double t) {
    const double e = std::exp(-t);
    return Vec2{(1 - 2 * p.x) * X(p.y) * e, X(p.x) * (1 - 2 * p.y) * e};
  };
  s.laplacian = [=](Point p, double t) { return -2.0 * (X(p.x) + X(p.y)) * std::exp(-t); };
  return s;
}

inline VelocityExpr example1_velocity_expr() {
  const auto s = example1_solution();
  VelocityExpr v;
  v.value = [s](Point p, double t) {
    const double w = example1_velocity(s.value(p, t));
    return Vec2{w, w};
  };
  // div (w(theta), w(theta)) = w'(theta) (theta_x + theta_y), w' = -(1+theta)^-2
  v.divergence = [s](Point p, double t) {
    const double th = s.value(p, t);
    const Vec2 g = s.gradient(p, t);
    return -(g.x + g.y) / ((1 + th) * (1 + th));
  };
  return v;
}

inline ManufacturedSolution example2_solution() {
  ManufacturedSolution s;
  s.value = [](Point p, double t) { return (p.x - p.x * p.x) * std::exp(t); };
  s.time_derivative = s.value;
  s.gradient = [](Point p, double t) { return Vec2{(1 - 2 * p.x) * std::exp(t), 0.0}; };
  s.laplacian = [](Point, double t) { return -2.0 * std::exp(t); };
  return s;
}

inline VelocityExpr uniform_velocity(Vec2 u) {
  return {[u](Point, double) { return u; }, [](Point, double) { return 0.0; }};
}

// ---------------------------------------------------------------------------
// Constitutive laws
// ---------------------------------------------------------------------------

/// Example 3 mobility factor (1 - theta + theta/16)^-4.
inline double example3_mobility_factor(double theta) {
  const double b = 1.0 - theta + theta / 16.0;
  return 1.0 / (b * b * b * b);
}

inline constexpr double saltwater_viscosity = 0.00108;
inline constexpr double freshwater_viscosity = 0.001;

/// Quarter-power mixing rule.
inline double quarter_power_viscosity(double theta, double mu_s = saltwater_viscosity,
                                      double mu_w = freshwater_viscosity) {
  const double b = theta / std::pow(mu_s, 0.25) + (1.0 - theta) / std::pow(mu_w, 0.25);
  return 1.0 / (b * b * b * b);
}

/// Injected concentration 0.45 sin(2 pi t / period) + 0.5.
inline double tide_concentration(double t, double period = 86400.0) {
  return 0.45 * std::sin(2.0 * std::numbers::pi * t / period) + 0.5;
}

// ---------------------------------------------------------------------------
// Stand-in input data
// ---------------------------------------------------------------------------

inline std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("CDA_DATA_DIR"); env && *env) return env;
  return CDA_DEFAULT_DATA_DIR;
}

/// Log-normal-like permeability: a seeded sum of random Fourier modes for
/// ln k, rescaled so that k spans [k_min, k_max].
inline Raster standin_permeability(std::size_t nx, std::size_t ny, std::uint64_t seed,
                                   double k_min = 0.1, double k_max = 10.0,
                                   std::size_t modes = 48) {
  std::mt19937_64 rng(seed);
  const auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  struct Mode {
    double kx, ky, phase, amp;
  };
  std::vector<Mode> ms;
  for (std::size_t m = 0; m < modes; ++m) {
    const double kx = std::floor(1 + 8 * uniform()) * (uniform() < 0.5 ? -1 : 1);
    const double ky = std::floor(1 + 8 * uniform());
    const double kk = std::hypot(kx, ky);
    ms.push_back({kx, ky, 2 * std::numbers::pi * uniform(), (0.5 + uniform()) / kk});
  }
  std::vector<double> v(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = (i + 0.5) / nx, y = (j + 0.5) / ny;
      double s = 0.0;
      for (const auto& m : ms)
        s += m.amp * std::cos(2 * std::numbers::pi * (m.kx * x + m.ky * y) + m.phase);
      v[j * nx + i] = std::exp(s);
    }
  return Raster(nx, ny, 1.0, 1.0, std::move(v)).rescaled_log(k_min, k_max);
}

/// Example 3 stand-in injection wells (g >= 0).
inline std::vector<Well> example3_wells() {
  return {{{0.25, 0.75}, 0.08, 1000.0}, {{0.75, 0.25}, 0.08, 1000.0}};
}

inline Raster standin_source(std::size_t nx, std::size_t ny) {
  const auto wells = example3_wells();
  std::vector<double> v(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const Point x{(i + 0.5) / nx, (j + 0.5) / ny};
      double s = 0.0;
      for (const auto& w : wells) s += w(x);
      v[j * nx + i] = s;
    }
  return Raster(nx, ny, 1.0, 1.0, std::move(v));
}

/// Two-lobed plume, values in [0, 0.9], vanishing near the boundary.
inline Raster standin_initial(std::size_t nx, std::size_t ny) {
  const Well lobes[] = {{{0.45, 0.5}, 0.28, 0.9}, {{0.62, 0.68}, 0.18, 0.5}};
  std::vector<double> v(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const Point x{(i + 0.5) / nx, (j + 0.5) / ny};
      double s = 0.0;
      for (const auto& l : lobes) s = std::max(s, l(x));
      v[j * nx + i] = std::min(s, 1.0);
    }
  return Raster(nx, ny, 1.0, 1.0, std::move(v));
}

inline constexpr std::uint64_t standin_seed = 20240917;

struct Example3Data {
  Raster permeability, source, initial;
  static Example3Data load(const std::filesystem::path& dir) {
    return {Raster::load(dir / "ex3_permeability.raster"), Raster::load(dir / "ex3_source.raster"),
            Raster::load(dir / "ex3_initial.raster")};
  }
  static Example3Data generate(std::size_t n = 240, std::uint64_t seed = standin_seed) {
    return {standin_permeability(n, n, seed), standin_source(n, n), standin_initial(n, n)};
  }
  void save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    permeability.save(dir / "ex3_permeability.raster");
    source.save(dir / "ex3_source.raster");
    initial.save(dir / "ex3_initial.raster");
  }
};

// ---------------------------------------------------------------------------
// Scenarios
// ---------------------------------------------------------------------------

inline Scenario example1() {
  Scenario s;
  s.name = "example1";
  s.nx = s.ny = 100;
  s.diffusion = [](Point) { return 1.0; };
  s.d_lower = 0.5;
  s.d_upper = 1.0;
  s.velocity_model = VelocityModel::prescribed;
  s.prescribed_velocity = [](Point, double th) {
    const double w = example1_velocity(clamp_unit(th));
    return Vec2{w, w};
  };
  const auto sol = example1_solution();
  s.exact = sol.value;
  s.theta0 = [sol](Point p) { return sol.value(p, 0.0); };
  s.source = manufactured_forcing(sol, example1_velocity_expr(), 1.0);
  s.t_end = 1.0;
  s.coarse_dt = 0.02;
  s.fine_per_coarse = 10;
  s.mu = 1000.0;
  s.hbar = 0.1;
  s.initial = InitialPolicy::zero;
  auto& a = s.assumptions;
  a.holds = {true, true, std::nullopt, true, std::nullopt, true, std::nullopt};
  a.note[2] = "velocity prescribed; no mobility";
  a.note[4] = "velocity prescribed; no pressure source";
  a.note[6] = "velocity prescribed; g = div v is not a model input";
  return s;
}

inline Scenario example2() {
  Scenario s;
  s.name = "example2";
  s.nx = s.ny = 50;
  s.boundary = BoundarySpec::dirichlet_left_right();
  s.diffusion = [](Point) { return 1.0; };
  s.d_lower = 0.5;
  s.d_upper = 1.0;
  s.velocity_model = VelocityModel::darcy;
  s.mobility = [](Point, double) { return 1.0; };
  s.pressure_source = [](Point) { return 0.0; };
  s.pressure_dirichlet = [](Point p) { return 1.0 - p.x; };
  s.velocity_once = true;
  const auto sol = example2_solution();
  s.exact = sol.value;
  s.theta0 = [sol](Point p) { return sol.value(p, 0.0); };
  s.source = manufactured_forcing(sol, uniform_velocity({1.0, 0.0}), 1.0);
  s.t_end = 2.0;
  s.coarse_dt = 0.02;
  s.fine_per_coarse = 1;
  s.mu = 10.0;
  s.hbar = 0.1;
  s.initial = InitialPolicy::zero;
  auto& a = s.assumptions;
  a.holds = {false, true, true, true, true, true, true};
  a.note[0] = "manufactured theta = (x - x^2) e^t exceeds 1 for t > ln 4";
  return s;
}

inline Scenario example3(const Example3Data& data) {
  Scenario s;
  s.name = "example3";
  s.nx = s.ny = 240;
  s.diffusion = [](Point) { return 0.01; };
  s.d_lower = 0.005;
  s.d_upper = 0.01;
  s.velocity_model = VelocityModel::darcy;
  const auto k = data.permeability;
  s.mobility = [k](Point x, double th) { return k(x) * example3_mobility_factor(th); };
  const auto g = data.source;
  s.pressure_source = [g](Point x) { return g(x); };
  const auto th0 = data.initial;
  s.theta0 = [th0](Point x) { return th0(x); };
  s.t_end = 0.03;
  s.coarse_dt = 0.002;
  s.fine_per_coarse = 5;
  s.mu = 1000.0;
  s.hbar = 1.0 / 30.0;
  s.initial = InitialPolicy::interpolated;
  s.stand_in_data = true;
  s.provenance = "stand-in rasters (seeded Fourier log-permeability, two injection wells, "
                 "two-lobed plume); the original profiles are published as figures only";
  s.assumptions.holds = {true, true, true, true, true, true, true};
  return s;
}

inline Scenario example3(const std::filesystem::path& data_dir = default_data_dir()) {
  return example3(Example3Data::load(data_dir));
}

struct Example4Wells {
  Well injection, discharge;
};

inline Example4Wells example4_wells(double side = 240.0) {
  const double r = 0.05 * side;
  return {{{190.0, 190.0}, r, 0.0005}, {{50.0, 50.0}, r, 0.002}};
}

inline Scenario example4(const Raster& permeability) {
  Scenario s;
  s.name = "example4";
  const double L = 240.0;
  s.lx = s.ly = L;
  s.nx = s.ny = 240;
  s.diffusion = [](Point) { return 1e-5; };
  s.d_lower = 5e-6;
  s.d_upper = 1e-5;
  s.velocity_model = VelocityModel::darcy;
  const auto k = permeability.rescaled_log(1e-9, 1e-7).with_extent(L, L);
  s.mobility = [k](Point x, double th) { return k(x) / quarter_power_viscosity(th); };
  const auto w = example4_wells(L);
  s.pressure_source = [w](Point x) { return w.injection(x) - w.discharge(x); };
  s.reaction = [w](Point x) { return w.discharge(x); };
  s.source = [w](Point x, double t) { return w.injection(x) * tide_concentration(t); };
  const Well pockets[] = {{{40.0, 200.0}, 35.0, 1.0}, {{200.0, 40.0}, 35.0, 1.0}};
  s.theta0 = [p0 = pockets[0], p1 = pockets[1]](Point x) { return std::max(p0(x), p1(x)); };
  s.t_end = 30.0 * 86400.0;
  s.coarse_dt = 2.0 * 86400.0;
  s.fine_per_coarse = 24;
  s.mu = 1e-5;
  s.hbar = 40.0;
  s.initial = InitialPolicy::interpolated;
  s.stand_in_data = true;
  s.provenance = "permeability is the example 3 stand-in rescaled to [1e-9, 1e-7]; "
                 "saltwater pockets are smooth bumps of radius 35 m";
  s.assumptions.holds = {true, true, true, true, true, true, true};
  return s;
}

inline Scenario example4(const std::filesystem::path& data_dir = default_data_dir()) {
  return example4(Raster::load(data_dir / "ex3_permeability.raster"));
}

/// No flow, q >= f >= 0 (A7 with g = 0), all-Neumann box; the physical range
/// check runs on this one. Truth comes from a reference run.
inline Scenario diffusion_reaction() {
  Scenario s;
  s.name = "diffusion_reaction";
  s.nx = s.ny = 40;
  s.boundary = BoundarySpec::all_neumann();
  s.diffusion = [](Point) { return 0.05; };
  s.d_lower = 0.025;
  s.d_upper = 0.05;
  s.velocity_model = VelocityModel::prescribed;
  s.prescribed_velocity = [](Point, double) { return Vec2{0.0, 0.0}; };
  s.velocity_once = true;
  const double pi = std::numbers::pi;
  s.reaction = [pi](Point x) { return 1.0 + 0.5 * std::sin(pi * x.x) * std::sin(pi * x.y); };
  s.source = [r = s.reaction](Point x, double) { return 0.5 * r(x); };
  s.theta0 = [pi](Point x) { return 0.5 + 0.45 * std::cos(pi * x.x) * std::cos(pi * x.y); };
  s.t_end = 1.0;
  s.coarse_dt = 0.05;
  s.fine_per_coarse = 5;
  s.mu = 10.0;
  s.hbar = 0.1;
  s.initial = InitialPolicy::interpolated;
  s.assumptions.holds = {true, true, std::nullopt, true, std::nullopt, true, true};
  s.assumptions.note[2] = "no flow";
  s.assumptions.note[4] = "no flow";
  return s;
}

inline Scenario scenario_by_name(const std::string& name,
                                 const std::filesystem::path& data_dir = default_data_dir()) {
  if (name == "diffusion_reaction") return diffusion_reaction();
  if (name == "example1") return example1();
  if (name == "example2") return example2();
  if (name == "example3") return example3(data_dir);
  if (name == "example4") return example4(data_dir);
  throw ConfigError("unknown scenario '" + name + "'");
}

} // namespace cda
