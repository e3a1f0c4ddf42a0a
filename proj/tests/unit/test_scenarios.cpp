#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "cda/scenarios.hpp"

using namespace cda;

namespace {
// f - (theta_t - D lap theta + div(v theta) + q theta) by central differences
double fd_residual(const ManufacturedSolution& s, const std::function<Vec2(Point, double)>& v,
                   double D, const SpaceTimeFn& f, Point x, double t) {
  const double h = 1e-4;
  const auto th = [&](Point p, double tt) { return s.value(p, tt); };
  const double tt = (th(x, t + h) - th(x, t - h)) / (2 * h);
  const double lap = (th({x.x + h, x.y}, t) + th({x.x - h, x.y}, t) + th({x.x, x.y + h}, t) +
                      th({x.x, x.y - h}, t) - 4 * th(x, t)) /
                     (h * h);
  const auto flux = [&](Point p) {
    const Vec2 w = v(p, t);
    return Vec2{w.x * th(p, t), w.y * th(p, t)};
  };
  const double div = (flux({x.x + h, x.y}).x - flux({x.x - h, x.y}).x) / (2 * h) +
                     (flux({x.x, x.y + h}).y - flux({x.x, x.y - h}).y) / (2 * h);
  return f(x, t) - (tt - D * lap + div);
}
} // namespace

TEST(Scenarios, Example1Closures) {
  EXPECT_EQ(example1_velocity(0.0), 1.0);
  EXPECT_EQ(example1_velocity(1.0), 0.5);
  const auto s = example1();
  EXPECT_DOUBLE_EQ(s.theta0({0.5, 0.5}), 1.0 / 16.0);
  EXPECT_EQ(s.nx, 100u);
  const auto v = s.prescribed_velocity({0.3, 0.3}, 1.0);
  EXPECT_EQ(v.x, 0.5);
}

TEST(Scenarios, ManufacturedForcingTrivial) {
  ManufacturedSolution c;
  c.value = [](Point, double) { return 2.0; };
  c.time_derivative = [](Point, double) { return 0.0; };
  c.gradient = [](Point, double) { return Vec2{}; };
  c.laplacian = [](Point, double) { return 0.0; };
  EXPECT_EQ(manufactured_forcing(c, {}, 1.0)({0.2, 0.3}, 0.4), 0.0);
}

TEST(Scenarios, Example1ForcingMatchesFiniteDifferences) {
  const auto sol = example1_solution();
  const auto f = example1().source;
  const auto v = example1_velocity_expr().value;
  const double center = fd_residual(sol, v, 1.0, f, {0.5, 0.5}, 0.0);
  EXPECT_LE(std::abs(center) / std::abs(f({0.5, 0.5}, 0.0)), 1e-6);
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> d(0.05, 0.95);
  for (int k = 0; k < 50; ++k) {
    const Point x{d(rng), d(rng)};
    EXPECT_LE(std::abs(fd_residual(sol, v, 1.0, f, x, d(rng))), 1e-6);
  }
}

TEST(Scenarios, Example2) {
  const auto s = example2();
  EXPECT_NEAR(s.exact({0.3, 0.1}, 1.0) / s.exact({0.3, 0.1}, 0.0), std::numbers::e, 1e-14);
  EXPECT_EQ(s.pressure_dirichlet({0.25, 0.0}), 0.75);
  EXPECT_FALSE(*s.assumptions.holds[0]);
  const auto v = uniform_velocity({1.0, 0.0}).value;
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> d(0.05, 0.95);
  for (int k = 0; k < 50; ++k) {
    const Point x{d(rng), d(rng)};
    const double t = 2 * d(rng);
    EXPECT_LE(std::abs(fd_residual(example2_solution(), v, 1.0, s.source, x, t)), 1e-6 * std::exp(t));
  }
}

TEST(Scenarios, Example3Mobility) {
  EXPECT_EQ(example3_mobility_factor(0.0), 1.0);
  EXPECT_NEAR(example3_mobility_factor(1.0), 65536.0, 1e-9);
  const auto data = Example3Data::generate(24, standin_seed);
  auto s = example3(data);
  for (Point x : {Point{0.1, 0.2}, Point{0.7, 0.9}}) {
    EXPECT_NEAR(s.mobility(x, 1.0) / s.mobility(x, 0.0), 65536.0, 1e-9);
    EXPECT_EQ(s.mobility(x, 0.0), data.permeability(x));
  }
  EXPECT_NEAR(data.permeability.min(), 0.1, 1e-12);
  EXPECT_NEAR(data.permeability.max(), 10.0, 1e-12);
}

TEST(Scenarios, RasterLookupAndRoundTrip) {
  const auto r = standin_permeability(16, 12, 7);
  for (std::size_t j = 0; j < 12; ++j)
    for (std::size_t i = 0; i < 16; ++i) EXPECT_EQ(r(r.cell_center(i, j)), r.at(i, j));
  std::stringstream ss;
  r.write(ss);
  const auto back = Raster::read(ss);
  EXPECT_EQ(back.values(), r.values());
  EXPECT_EQ(back.nx(), 16u);
  std::stringstream bad("2 2 1 1\n1 2 3\n");
  EXPECT_THROW(Raster::read(bad), InputError);
}

TEST(Scenarios, StandInsAreSeeded) {
  EXPECT_EQ(standin_permeability(8, 8, 1).values(), standin_permeability(8, 8, 1).values());
  EXPECT_NE(standin_permeability(8, 8, 1).values(), standin_permeability(8, 8, 2).values());
}

TEST(Scenarios, Example4Closures) {
  EXPECT_NEAR(quarter_power_viscosity(0.0), 0.001, 1e-15);
  EXPECT_NEAR(quarter_power_viscosity(1.0), 0.00108, 1e-15);
  EXPECT_DOUBLE_EQ(tide_concentration(0.0), 0.5);
  EXPECT_DOUBLE_EQ(tide_concentration(86400.0 / 4), 0.95);
  double lo = 1, hi = 0;
  for (int k = 0; k < 1000; ++k) {
    const double c = tide_concentration(86400.0 * k / 1000.0);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  EXPECT_NEAR(lo, 0.05, 1e-6);
  EXPECT_NEAR(hi, 0.95, 1e-6);
}

TEST(Scenarios, WellsIntegrateToTotals) {
  const auto w = example4_wells();
  for (const auto& well : {w.injection, w.discharge}) {
    const Rect r{well.center.x - well.radius, well.center.y - well.radius,
                 well.center.x + well.radius, well.center.y + well.radius};
    double s = 0.0;
    const int n = 200;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Rect c{r.x0 + (r.x1 - r.x0) * i / n, r.y0 + (r.y1 - r.y0) * j / n,
                     r.x0 + (r.x1 - r.x0) * (i + 1) / n, r.y0 + (r.y1 - r.y0) * (j + 1) / n};
        s += integrate(c, [&](Point p) { return well(p); });
      }
    EXPECT_NEAR(s, well.total(), 1e-6 * well.total());
  }
}

TEST(Scenarios, DiffusionReactionSatisfiesA7) {
  const auto s = diffusion_reaction();
  for (Point x : {Point{0.1, 0.1}, Point{0.5, 0.5}, Point{0.9, 0.3}}) {
    const double q = s.reaction(x), f = s.source(x, 0.3);
    EXPECT_GE(2 * q, 0.0);
    EXPECT_GE(q, f);
    EXPECT_GE(f, 0.0);
    EXPECT_GE(s.theta0(x), 0.0);
    EXPECT_LE(s.theta0(x), 1.0);
  }
  EXPECT_THROW(scenario_by_name("nope"), ConfigError);
}
