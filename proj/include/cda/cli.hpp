#pragma once
/// @file cli.hpp
/// @brief Run configuration files, CSV and raster writers, and the `run`,
/// `validate` and `sweep` commands.
///
/// Config grammar (one item per line):
///   # comment          ignored, as are blank lines
///   [section]          starts a section
///   key = value        sets section.key; values are trimmed
/// Lists are comma separated. Unknown keys are rejected.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cda/driver.hpp"
#include "cda/errors.hpp"
#include "cda/observation.hpp"
#include "cda/raster.hpp"
#include "cda/scenarios.hpp"

namespace cda {

inline constexpr const char* output_root_env = "CDA_OUTPUT_ROOT";

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

using ConfigMap = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline ConfigMap parse_config(std::istream& is) {
  ConfigMap out;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    out[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
  }
  return out;
}

inline double parse_number(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d))
    throw ConfigError(key + ": not a number: '" + v + "'");
  return d;
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  const double d = parse_number(key, v);
  if (d < 1 || d != std::floor(d)) throw ConfigError(key + ": expected a positive integer");
  return static_cast<std::size_t>(d);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(key, trim(item)));
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false");
}

struct RunConfig {
  std::string scenario = "example1";
  std::filesystem::path data_dir = default_data_dir();
  std::optional<std::size_t> nx, ny;
  std::optional<double> t_end, coarse_dt;
  std::optional<std::size_t> fine_per_coarse;
  std::optional<double> mu, hbar;
  std::optional<InitialPolicy> initial;
  std::optional<FunctionalKind> functional;
  std::optional<std::uint64_t> seed; // regenerate stand-in data instead of loading it
  double pressure_rel_tol = 1e-12;
  double transport_rel_tol = 1e-12;
  std::size_t max_iter = 0;
  std::filesystem::path output_dir = "out";
  std::vector<double> snapshots;
  std::vector<double> sweep_mu, sweep_hbar;
  bool parallel = true;
};

inline RunConfig run_config_from_map(const ConfigMap& m) {
  RunConfig c;
  for (const auto& [k, v] : m) {
    if (k == "scenario.name") c.scenario = v;
    else if (k == "scenario.data_dir") c.data_dir = v;
    else if (k == "scenario.seed") c.seed = static_cast<std::uint64_t>(parse_count(k, v));
    else if (k == "mesh.nx") c.nx = parse_count(k, v);
    else if (k == "mesh.ny") c.ny = parse_count(k, v);
    else if (k == "time.t_end") c.t_end = parse_number(k, v);
    else if (k == "time.coarse_dt") c.coarse_dt = parse_number(k, v);
    else if (k == "time.fine_per_coarse") c.fine_per_coarse = parse_count(k, v);
    else if (k == "assimilation.mu") c.mu = parse_number(k, v);
    else if (k == "assimilation.hbar") c.hbar = parse_number(k, v);
    else if (k == "assimilation.initial") {
      if (v == "zero") c.initial = InitialPolicy::zero;
      else if (v == "interpolated") c.initial = InitialPolicy::interpolated;
      else throw ConfigError(k + ": expected zero or interpolated");
    } else if (k == "assimilation.functional") {
      if (v == "point_value") c.functional = FunctionalKind::point_value;
      else if (v == "cell_average") c.functional = FunctionalKind::cell_average;
      else throw ConfigError(k + ": expected point_value or cell_average");
    } else if (k == "solver.pressure_rel_tol") c.pressure_rel_tol = parse_number(k, v);
    else if (k == "solver.transport_rel_tol") c.transport_rel_tol = parse_number(k, v);
    else if (k == "solver.max_iter") c.max_iter = parse_count(k, v);
    else if (k == "output.dir") c.output_dir = v;
    else if (k == "output.snapshots") c.snapshots = parse_list(k, v);
    else if (k == "sweep.mu") c.sweep_mu = parse_list(k, v);
    else if (k == "sweep.hbar") c.sweep_hbar = parse_list(k, v);
    else if (k == "sweep.parallel") c.parallel = parse_bool(k, v);
    else throw ConfigError("unknown key '" + k + "'");
  }
  if (c.mu && *c.mu < 0.0) throw ConfigError("assimilation.mu must be nonnegative");
  if (c.hbar && !(*c.hbar > 0.0)) throw ConfigError("assimilation.hbar must be positive");
  for (double mu : c.sweep_mu)
    if (mu < 0.0) throw ConfigError("sweep.mu entries must be nonnegative");
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return run_config_from_map(parse_config(in));
}

inline Scenario build_scenario(const RunConfig& c) {
  Scenario s;
  if (c.seed && (c.scenario == "example3" || c.scenario == "example4")) {
    const auto data = Example3Data::generate(240, *c.seed);
    s = c.scenario == "example3" ? example3(data) : example4(data.permeability);
  } else {
    s = scenario_by_name(c.scenario, c.data_dir);
  }
  if (c.nx) s.nx = *c.nx;
  if (c.ny) s.ny = *c.ny;
  if (c.nx && !c.ny) s.ny = *c.nx;
  if (c.t_end) s.t_end = *c.t_end;
  if (c.coarse_dt) s.coarse_dt = *c.coarse_dt;
  if (c.fine_per_coarse) s.fine_per_coarse = *c.fine_per_coarse;
  if (c.mu) s.mu = *c.mu;
  if (c.hbar) s.hbar = *c.hbar;
  if (c.initial) s.initial = *c.initial;
  if (c.functional) s.functional = *c.functional;
  for (double t : c.snapshots)
    if (t < 0.0 || t > s.t_end * (1 + 1e-12))
      throw ConfigError("snapshot time " + format_double(t) + " outside [0, T]");
  return s;
}

inline RunOptions run_options(const RunConfig& c) {
  RunOptions o;
  o.pressure_solver.rel_tol = c.pressure_rel_tol;
  o.transport_solver.rel_tol = c.transport_rel_tol;
  o.pressure_solver.max_iter = o.transport_solver.max_iter = c.max_iter;
  o.snapshot_times = c.snapshots;
  return o;
}

/// Output directory, re-rooted under $CDA_OUTPUT_ROOT when set.
inline std::filesystem::path resolve_output_dir(const std::filesystem::path& dir) {
  if (const char* root = std::getenv(output_root_env); root && *root)
    return std::filesystem::path(root) / dir.relative_path();
  return dir;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr const char* metrics_header =
    "t,R_percent,Rtilde_percent,mass_residual,range_min,range_max";

inline void write_metrics_csv(std::ostream& os, const RunReport& r) {
  os << metrics_header << '\n';
  for (const auto& s : r.samples)
    os << format_double(s.t) << ',' << format_double(s.R) << ',' << format_double(s.Rtilde) << ','
       << format_double(s.mass_residual) << ',' << format_double(s.range_min) << ','
       << format_double(s.range_max) << '\n';
}

inline std::vector<MetricSample> read_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim(line) != metrics_header)
    throw InputError("metrics csv: unexpected header");
  std::vector<MetricSample> out;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
    if (v.size() != 6) throw InputError("metrics csv: expected 6 columns");
    MetricSample s;
    s.t = v[0];
    s.R = v[1];
    s.Rtilde = v[2];
    s.mass_residual = v[3];
    s.range_min = v[4];
    s.range_max = v[5];
    out.push_back(s);
  }
  return out;
}

inline constexpr const char* interp_header = "t,R_interp_percent";

inline void write_interp_csv(std::ostream& os, const RunReport& r) {
  os << interp_header << '\n';
  for (const auto& s : r.samples)
    if (s.coarse) os << format_double(s.t) << ',' << format_double(s.R_interp) << '\n';
}

inline constexpr const char* sweep_header =
    "hbar,mu,ok,plateau_R_percent,plateau_R_interp_percent,rate,r_squared,error";

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << sweep_header << '\n';
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << format_double(r.hbar) << ',' << format_double(r.mu) << ',' << (r.ok ? 1 : 0) << ','
       << format_double(r.plateau_R) << ',' << format_double(r.plateau_R_interp) << ','
       << format_double(r.rate) << ',' << format_double(r.r_squared) << ',' << err << '\n';
  }
}

inline std::string time_tag(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline void write_report_txt(std::ostream& os, const Scenario& s, const RunReport& rep,
                             const RunReport* ref) {
  os << "scenario " << s.name << '\n'
     << "mesh " << s.nx << 'x' << s.ny << '\n'
     << "mu " << format_double(rep.mu) << '\n'
     << "hbar " << format_double(rep.hbar) << '\n'
     << "plateau_R_percent " << format_double(plateau_R(rep)) << '\n'
     << "plateau_R_interp_percent " << format_double(plateau_R_interp(rep)) << '\n';
  if (rep.fit)
    os << "decay_rate " << format_double(rep.fit->rate) << '\n'
       << "decay_r_squared " << format_double(rep.fit->r_squared) << '\n'
       << "decay_window " << format_double(rep.fit->t_a) << ' ' << format_double(rep.fit->t_b) << '\n';
  else
    os << "decay_rate nan\n";
  os << "max_mass_residual " << format_double(rep.max_mass_residual) << '\n'
     << "max_flux_residual " << format_double(rep.max_flux_residual) << '\n'
     << "range " << format_double(rep.range_min) << ' ' << format_double(rep.range_max) << '\n'
     << "pressure_iterations " << rep.pressure_iterations << '\n'
     << "transport_iterations " << rep.transport_iterations << '\n';
  if (ref && std::isfinite(plateau_R(*ref))) os << "reference_plateau_R_percent " << format_double(plateau_R(*ref)) << '\n';
  if (s.stand_in_data) os << "stand_in_data " << s.provenance << '\n';
}

inline int cmd_run(const RunConfig& c, std::ostream& log = std::cout) {
  const Scenario s = build_scenario(c);
  const auto tp = partition_of(s);
  const auto opt = run_options(c);
  const auto dir = resolve_output_dir(c.output_dir);
  std::filesystem::create_directories(dir);
  std::ofstream status(dir / "report.txt");
  try {
    const auto mesh = s.mesh();
    const SparseGrid grid(mesh, s.hbar, s.functional);
    log << "reference run " << s.name << " " << s.nx << "x" << s.ny << "\n";
    auto ref = run_reference(s, tp, nullptr, opt);
    {
      std::ofstream f(dir / "reference_metrics.csv");
      write_metrics_csv(f, ref.report);
    }
    const auto stream = make_observations(s, tp, grid, &ref);
    {
      std::ofstream f(dir / "observations.csv");
      stream.write_csv(f);
    }
    log << "assimilated run mu=" << format_double(s.mu) << " hbar=" << format_double(s.hbar) << "\n";
    auto run = run_assimilated(s, tp, grid, stream, s.mu, s.initial, &ref, opt);
    try {
      run.report.fit = fit_decay_rate(run.report);
    } catch (const std::domain_error&) {
    }
    {
      std::ofstream f(dir / "metrics.csv");
      write_metrics_csv(f, run.report);
    }
    {
      std::ofstream f(dir / "interp_metrics.csv");
      write_interp_csv(f, run.report);
    }
    for (std::size_t i = 0; i < run.snapshots.times.size(); ++i)
      snapshot_raster(run.snapshots.states[i])
          .save(dir / ("theta_t" + time_tag(run.snapshots.times[i]) + ".raster"));
    write_report_txt(status, s, run.report, &ref.report);
    log << "plateau R " << format_double(plateau_R(run.report)) << "%  -> " << dir.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    status << "failed " << e.what() << '\n';
    status.flush();
    std::cerr << "run failed: " << e.what() << '\n';
    return 2;
  }
}

inline int cmd_sweep(const RunConfig& c, std::ostream& log = std::cout) {
  const Scenario s = build_scenario(c);
  const auto tp = partition_of(s);
  const auto mus = c.sweep_mu.empty() ? std::vector<double>{s.mu} : c.sweep_mu;
  const auto hbars = c.sweep_hbar.empty() ? std::vector<double>{s.hbar} : c.sweep_hbar;
  const auto dir = resolve_output_dir(c.output_dir);
  std::filesystem::create_directories(dir);
  log << "sweep " << s.name << ": " << mus.size() << " mu x " << hbars.size() << " hbar\n";
  const auto rows = mu_sweep(s, tp, mus, hbars, run_options(c), c.parallel);
  {
    std::ofstream f(dir / "sweep.csv");
    write_sweep_csv(f, rows);
  }
  bool all_ok = true;
  for (const auto& r : rows) {
    all_ok = all_ok && r.ok;
    if (!r.report) continue;
    const auto sub = dir / ("mu" + time_tag(r.mu) + "_hbar" + time_tag(r.hbar));
    std::filesystem::create_directories(sub);
    std::ofstream f(sub / "metrics.csv");
    write_metrics_csv(f, *r.report);
  }
  log << "wrote " << (dir / "sweep.csv").string() << "\n";
  return all_ok ? 0 : 2;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class CheckLevel { pass, warn, fail, na };

struct CheckResult {
  std::string name;
  CheckLevel level;
  std::string detail;
};

inline const char* level_name(CheckLevel l) {
  switch (l) {
  case CheckLevel::pass: return "PASS";
  case CheckLevel::warn: return "WARN";
  case CheckLevel::fail: return "FAIL";
  default: return "N/A ";
  }
}

/// c0 in ||P_hbar u - u|| <= c0 hbar ||u||_1 for u = sin(pi x/Lx) sin(pi y/Ly),
/// over the admissible lattices hbar, 2 hbar, 4 hbar; also returns the fitted
/// log-log rate when at least two lattices fit.
inline std::pair<double, double> interpolation_constant(const StructuredMesh& m, double hbar,
                                                        FunctionalKind kind) {
  const double pi = std::numbers::pi;
  const auto u = [&](Point x) { return std::sin(pi * x.x / m.lx()) * std::sin(pi * x.y / m.ly()); };
  const double area = m.lx() * m.ly();
  const double h1 = std::sqrt(area / 4.0 * (1.0 + pi * pi / (m.lx() * m.lx()) + pi * pi / (m.ly() * m.ly())));
  const auto uh = interpolate(m, u);
  double c0 = 0.0;
  std::vector<std::pair<double, double>> pts;
  for (double f : {1.0, 2.0, 4.0}) {
    try {
      const SparseGrid g(m, f * hbar, kind);
      const double err = l2_distance(apply_Ph(g, uh), u);
      c0 = std::max(c0, err / (f * hbar * h1));
      pts.push_back({std::log(f * hbar), std::log(err)});
    } catch (const ConfigError&) {
    }
  }
  double rate = std::numeric_limits<double>::quiet_NaN();
  if (pts.size() >= 2) {
    double mx = 0, my = 0;
    for (auto [x, y] : pts) mx += x, my += y;
    mx /= pts.size();
    my /= pts.size();
    double sxx = 0, sxy = 0;
    for (auto [x, y] : pts) sxx += (x - mx) * (x - mx), sxy += (x - mx) * (y - my);
    rate = sxy / sxx;
  }
  return {c0, rate};
}

inline std::vector<CheckResult> validate_scenario(const Scenario& s) {
  std::vector<CheckResult> out;
  const auto mesh = s.mesh();
  std::vector<Point> pts;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) pts.push_back(mesh.element_rect(e).center());
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) pts.push_back(mesh.vertex(v));
  std::vector<double> times;
  const std::size_t nt = 20;
  for (std::size_t i = 0; i <= nt; ++i) times.push_back(s.t_end * static_cast<double>(i) / nt);
  auto add = [&](std::string n, bool ok, std::string d, CheckLevel bad = CheckLevel::warn) {
    out.push_back({std::move(n), ok ? CheckLevel::pass : bad, std::move(d)});
  };
  auto recorded = [&](int i) {
    const auto& h = s.assumptions.holds[i];
    return std::string(" (recorded: ") + (h ? (*h ? "holds" : "does not hold") : "n/a") +
           (s.assumptions.note[i].empty() ? "" : "; " + s.assumptions.note[i]) + ")";
  };

  // A1
  {
    double lo = 1e300, hi = -1e300;
    for (const auto& p : pts) {
      const double v = s.theta0(p);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    bool ok = lo >= 0.0 && hi <= 1.0;
    std::string d = "theta0 in [" + format_double(lo) + ", " + format_double(hi) + "]";
    if (s.exact) {
      double elo = 1e300, ehi = -1e300;
      for (double t : times)
        for (const auto& p : pts) {
          const double v = s.exact(p, t);
          elo = std::min(elo, v);
          ehi = std::max(ehi, v);
        }
      ok = ok && elo >= 0.0 && ehi <= 1.0;
      d += "; exact solution over [0,T] in [" + format_double(elo) + ", " + format_double(ehi) + "]";
    }
    add("A1 concentration range", ok, d + recorded(0));
  }
  // A2
  {
    double lo = 1e300, hi = -1e300;
    for (const auto& p : pts) {
      const double v = s.diffusion(p);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    add("A2 diffusion bounds", s.d_lower > 0.0 && s.d_lower < lo && hi <= s.d_upper,
        "D in [" + format_double(lo) + ", " + format_double(hi) + "], D_* = " +
            format_double(s.d_lower) + ", D^* = " + format_double(s.d_upper),
        CheckLevel::fail);
  }
  // A3
  if (s.velocity_model == VelocityModel::prescribed) {
    out.push_back({"A3 mobility bounds", CheckLevel::na, "velocity prescribed" + recorded(2)});
  } else {
    double lo = 1e300, hi = -1e300;
    for (const auto& p : pts)
      for (double th : {0.0, 0.5, 1.0}) {
        const double v = s.mobility(p, th);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    add("A3 mobility bounds", lo > 0.0 && std::isfinite(hi),
        "kappa in [" + format_double(lo) + ", " + format_double(hi) + "]", CheckLevel::fail);
  }
  // A4..A6: finite L2 norms (sampled finite values on a bounded domain)
  auto finite_check = [&](const std::string& name, const std::function<double(Point, double)>& f,
                          int idx) {
    if (!f) {
      add(name, true, "identically zero" + recorded(idx));
      return;
    }
    double mx = 0.0;
    bool ok = true;
    for (double t : times)
      for (const auto& p : pts) {
        const double v = f(p, t);
        ok = ok && std::isfinite(v);
        mx = std::max(mx, std::abs(v));
      }
    add(name, ok, "max |.| = " + format_double(mx) + recorded(idx), CheckLevel::fail);
  };
  finite_check("A4 reaction q in L2",
               s.reaction ? std::function<double(Point, double)>([&](Point p, double) { return s.reaction(p); })
                          : nullptr,
               3);
  if (s.velocity_model == VelocityModel::prescribed)
    out.push_back({"A5 pressure source g in L2", CheckLevel::na, "velocity prescribed" + recorded(4)});
  else
    finite_check("A5 pressure source g in L2",
                 s.pressure_source
                     ? std::function<double(Point, double)>([&](Point p, double) { return s.pressure_source(p); })
                     : nullptr,
                 4);
  finite_check("A6 source f in L2", s.source, 5);
  // A7 (g taken as zero when there is no pressure model)
  if (s.velocity_model == VelocityModel::prescribed && !s.assumptions.holds[6]) {
    out.push_back({"A7 g + 2q >= 0, g + q >= f >= 0", CheckLevel::na, "velocity prescribed" + recorded(6)});
  } else {
    double m1 = 1e300, m2 = 1e300, m3 = 1e300;
    for (double t : times)
      for (const auto& p : pts) {
        const double g = s.pressure_source ? s.pressure_source(p) : 0.0;
        const double q = s.reaction ? s.reaction(p) : 0.0;
        const double f = s.source ? s.source(p, t) : 0.0;
        m1 = std::min(m1, g + 2 * q);
        m2 = std::min(m2, g + q - f);
        m3 = std::min(m3, f);
      }
    const double tol = 1e-12;
    add("A7 g + 2q >= 0, g + q >= f >= 0", m1 >= -tol && m2 >= -tol && m3 >= -tol,
        "min(g+2q) = " + format_double(m1) + ", min(g+q-f) = " + format_double(m2) +
            ", min f = " + format_double(m3) + recorded(6));
  }
  // lattice alignment and stability proxy
  try {
    const SparseGrid g(mesh, s.hbar, s.functional);
    add("lattice alignment", true,
        "hbar = " + format_double(s.hbar) + " = " + std::to_string(g.stride_x()) + " h_x, " +
            std::to_string(g.cells_x()) + "x" + std::to_string(g.cells_y()) + " lattice cells");
    const auto [c0, rate] = interpolation_constant(mesh, s.hbar, s.functional);
    double dmin = 1e300;
    for (const auto& p : pts) dmin = std::min(dmin, s.diffusion(p));
    if (s.d_lower > 0.0) dmin = std::min(dmin, s.d_lower); // declared D_* when given
    const double lhs = s.mu * c0 * c0 * s.hbar * s.hbar;
    add("stability proxy mu c0^2 hbar^2 < D_*", lhs < dmin,
        "mu c0^2 hbar^2 = " + format_double(lhs) + ", D_* = " + format_double(dmin) +
            " (c0 = " + format_double(c0) + ", fitted interpolation rate " + format_double(rate) + ")");
  } catch (const ConfigError& e) {
    add("lattice alignment", false, e.what(), CheckLevel::fail);
  }
  if (s.stand_in_data) out.push_back({"input data", CheckLevel::warn, s.provenance});
  return out;
}

inline int cmd_validate(const RunConfig& c, std::ostream& os = std::cout) {
  const Scenario s = build_scenario(c);
  const auto checks = validate_scenario(s);
  bool failed = false;
  for (const auto& r : checks) {
    os << level_name(r.level) << "  " << r.name << ": " << r.detail << '\n';
    failed = failed || r.level == CheckLevel::fail;
  }
  return failed ? 2 : 0;
}

} // namespace cda
