#pragma once
/// @file driver.hpp
/// @brief Coarse/fine time integration (pressure and flux on the coarse
/// levels, transport on the fine levels), twin experiments, error metrics,
/// decay-rate fits and parameter sweeps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cda/errors.hpp"
#include "cda/fields.hpp"
#include "cda/flux_postprocess.hpp"
#include "cda/linalg.hpp"
#include "cda/observation.hpp"
#include "cda/pressure.hpp"
#include "cda/scenarios.hpp"
#include "cda/transport.hpp"

namespace cda {

/// Coarse levels t_0 < ... < t_M, each interval split into m equal fine steps.
struct TimePartition {
  std::vector<double> coarse;
  std::size_t fine_per_coarse = 1;

  static TimePartition uniform(double t_end, double coarse_dt, std::size_t m) {
    if (!(coarse_dt > 0.0) || !(t_end > 0.0) || m == 0)
      throw ConfigError("time partition: need t_end > 0, coarse dt > 0, m >= 1");
    const double steps = t_end / coarse_dt;
    const auto M = static_cast<std::size_t>(std::llround(steps));
    if (M == 0 || std::abs(steps - static_cast<double>(M)) > 1e-9 * steps)
      throw ConfigError("time partition: t_end is not a multiple of the coarse step");
    TimePartition p;
    p.fine_per_coarse = m;
    for (std::size_t n = 0; n <= M; ++n) p.coarse.push_back(static_cast<double>(n) * coarse_dt);
    return p;
  }

  std::size_t num_coarse() const { return coarse.size() - 1; }
  std::size_t num_fine() const { return num_coarse() * fine_per_coarse; }

  /// s_{j,n}, j = 0..m, on interval n = 1..M; exact at both ends.
  double fine_time(std::size_t n, std::size_t j) const {
    if (j == 0) return coarse[n - 1];
    if (j == fine_per_coarse) return coarse[n];
    const double a = coarse[n - 1], b = coarse[n];
    return a + (b - a) * static_cast<double>(j) / static_cast<double>(fine_per_coarse);
  }

  double fine_dt() const {
    return (coarse[1] - coarse[0]) / static_cast<double>(fine_per_coarse);
  }
};

inline TimePartition partition_of(const Scenario& s) {
  return TimePartition::uniform(s.t_end, s.coarse_dt, s.fine_per_coarse);
}

struct RunOptions {
  SolverConfig pressure_solver{SolverMethod::cg, Preconditioner::jacobi, 1e-12, 1e-12, 0, {}};
  SolverConfig transport_solver{SolverMethod::bicgstab, Preconditioner::jacobi, 1e-12, 1e-15, 0, {}};
  /// Keep every fine-level state (needed when the run serves as a reference).
  bool keep_fine_states = false;
  /// Extra coarse-level snapshots are always kept; this adds arbitrary times
  /// (matched to the nearest fine level).
  std::vector<double> snapshot_times;
};

struct MetricSample {
  double t = 0.0;
  bool coarse = false;
  double R = std::numeric_limits<double>::quiet_NaN();
  double Rtilde = std::numeric_limits<double>::quiet_NaN();
  double mass_residual = 0.0; // relative residual of the step ending at t
  double range_min = 0.0;
  double range_max = 0.0;
  /// Interpolation error R(P_hbar theta), coarse samples only.
  double R_interp = std::numeric_limits<double>::quiet_NaN();
};

struct DecayFit {
  double rate = 0.0;      // xi-hat, 1/time
  double intercept = 0.0; // log R at t = 0
  double r_squared = 0.0;
  double t_a = 0.0, t_b = 0.0;
  std::size_t samples = 0;
};

struct RunReport {
  std::string scenario;
  double mu = 0.0;
  double hbar = 0.0;
  std::vector<MetricSample> samples;
  std::optional<DecayFit> fit;
  double max_mass_residual = 0.0;
  double max_flux_residual = 0.0;      // absolute, postprocessed flux
  double max_flux_residual_ratio = 0.0; // residual / tolerance
  double range_min = std::numeric_limits<double>::infinity();
  double range_max = -std::numeric_limits<double>::infinity();
  std::size_t pressure_iterations = 0;
  std::size_t transport_iterations = 0;

  std::vector<MetricSample> coarse_samples() const {
    std::vector<MetricSample> out;
    for (const auto& s : samples)
      if (s.coarse) out.push_back(s);
    return out;
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<NodalField> states;
};

struct ReferenceRun {
  Trajectory coarse;             // states at t_0..t_M
  std::vector<NodalField> fine;  // every fine level, when kept
  Trajectory snapshots;
  RunReport report;
};

struct AssimilatedRun {
  Trajectory coarse;
  Trajectory snapshots;
  RunReport report;
};

// ---------------------------------------------------------------------------
// Truth used for metrics: the analytic solution when the scenario has one,
// otherwise the stored fine-level reference states.
// ---------------------------------------------------------------------------
class Truth {
public:
  Truth() = default;
  explicit Truth(SpaceTimeFn exact) : exact_(std::move(exact)) {}
  explicit Truth(const ReferenceRun* ref) : ref_(ref) {
    if (ref_ && ref_->fine.empty())
      throw std::invalid_argument("truth: reference run kept no fine states");
  }

  bool available() const { return exact_ || ref_; }

  /// ||u - truth(t)|| and ||truth(t)||; k is the global fine index.
  std::pair<double, double> distance_and_norm(const NodalField& u, double t, std::size_t k) const {
    if (exact_) {
      const auto f = [&](Point x) { return exact_(x, t); };
      return {l2_distance(u, f), l2_norm(u.mesh(), f)};
    }
    const auto& r = ref_->fine.at(k);
    return {l2_distance(u, r), l2_norm(r)};
  }

  /// Measurement vector at t (analytic: measured nodal interpolant).
  std::vector<double> measure(const SparseGrid& grid, double t, std::size_t k) const {
    if (exact_) return grid.measure(interpolate(grid.mesh(), [&](Point x) { return exact_(x, t); }));
    return grid.measure(ref_->fine.at(k));
  }

private:
  SpaceTimeFn exact_;
  const ReferenceRun* ref_ = nullptr;
};

inline double relative_percent(double dist, double norm) {
  return norm > 0.0 ? 100.0 * dist / norm : (dist == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
}

namespace detail {

inline TransportCoefficients transport_coefficients(const Scenario& s, double mu) {
  return {s.diffusion, s.reaction, s.source, s.theta_dirichlet, mu};
}

inline PressureProblem pressure_problem(const Scenario& s, const StructuredMesh& m) {
  return {m, s.mobility, s.pressure_source, s.pressure_dirichlet};
}

/// Prescribed velocity evaluated with the frozen concentration at the
/// segment midpoints.
inline AdvectionField prescribed_advection(const Scenario& s, const NodalField& theta) {
  const auto& m = theta.mesh();
  AdvectionField a{std::vector<double>(4 * m.num_elements())};
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto th = theta.element_values(e);
    for (int k = 0; k < 4; ++k) {
      const auto& seg = element_segments[k];
      const Point x = segment_midpoint(m, e, seg);
      const Vec2 v = s.prescribed_velocity(x, element_value(th, seg.mid_u, seg.mid_v));
      a.segment_flux[4 * e + k] = dot(v, seg.normal) * segment_length(m, seg);
    }
  }
  return a;
}

struct SimulationInput {
  const Scenario* scenario = nullptr;
  const TimePartition* partition = nullptr;
  NodalField initial;
  double mu = 0.0;
  const SparseGrid* grid = nullptr;          // needed when mu > 0 or for R-tilde
  const ObservationStream* stream = nullptr; // needed when mu > 0 or for R-tilde
  Truth truth;
};

struct SimulationOutput {
  Trajectory coarse;
  std::vector<NodalField> fine;
  Trajectory snapshots;
  RunReport report;
};

inline MetricSample measure_sample(const NodalField& u, double t, std::size_t k, bool coarse,
                                   const SimulationInput& in) {
  MetricSample s;
  s.t = t;
  s.coarse = coarse;
  const auto [lo, hi] = std::minmax_element(u.data().begin(), u.data().end());
  s.range_min = *lo;
  s.range_max = *hi;
  if (!in.truth.available()) return s;
  const auto [dist, norm] = in.truth.distance_and_norm(u, t, k);
  s.R = relative_percent(dist, norm);
  if (in.grid && in.stream) {
    const auto Ey = in.grid->reconstruct(in.stream->interpolate_in_time(t));
    s.Rtilde = relative_percent(l2_distance(u, Ey), norm);
    if (coarse) {
      const auto [d2, n2] = in.truth.distance_and_norm(Ey, t, k);
      s.R_interp = relative_percent(d2, n2);
    }
  }
  return s;
}

inline SimulationOutput simulate(const SimulationInput& in, const RunOptions& opt) {
  const Scenario& sc = *in.scenario;
  const TimePartition& tp = *in.partition;
  const auto& mesh = in.initial.mesh();
  if (in.mu < 0.0) throw ConfigError("mu must be nonnegative");
  if (in.mu > 0.0 && (!in.grid || !in.stream))
    throw ConfigError("nudging requires an observation grid and stream");

  SimulationOutput out;
  auto& rep = out.report;
  rep.scenario = sc.name;
  rep.mu = in.mu;
  rep.hbar = in.grid ? in.grid->hbar() : 0.0;

  TransportOperator op(mesh, transport_coefficients(sc, in.mu), tp.fine_dt(),
                       in.mu > 0.0 ? in.grid : nullptr);
  const ObservationStream* nudge_stream = in.mu > 0.0 ? in.stream : nullptr;

  std::vector<double> snap_left = opt.snapshot_times;
  std::sort(snap_left.begin(), snap_left.end());
  auto take_snapshots = [&](const NodalField& u, double t, double dt) {
    while (!snap_left.empty() && snap_left.front() <= t + 0.5 * dt) {
      out.snapshots.times.push_back(t);
      out.snapshots.states.push_back(u);
      snap_left.erase(snap_left.begin());
    }
  };

  NodalField theta = in.initial;
  out.coarse.times.push_back(tp.coarse[0]);
  out.coarse.states.push_back(theta);
  if (opt.keep_fine_states) out.fine.push_back(theta);
  rep.samples.push_back(measure_sample(theta, tp.coarse[0], 0, true, in));
  take_snapshots(theta, tp.coarse[0], tp.fine_dt());

  std::optional<NodalField> pressure;
  const PressureProblem pb = sc.velocity_model == VelocityModel::darcy
                                 ? pressure_problem(sc, mesh)
                                 : PressureProblem{mesh, nullptr, nullptr, nullptr};
  std::size_t k = 0;
  for (std::size_t n = 1; n <= tp.num_coarse(); ++n) {
    // Coarse update: freeze the mobility at theta(t_{n-1}).
    if (n == 1 || !sc.velocity_once) {
      if (sc.velocity_model == VelocityModel::prescribed) {
        op.set_advection(prescribed_advection(sc, theta));
      } else {
        auto ps = solve_pressure_report(pb, theta, opt.pressure_solver,
                                        pressure ? &*pressure : nullptr);
        rep.pressure_iterations += ps.report.iterations;
        pressure = std::move(ps.pressure);
        const auto flux = postprocess_flux(pb, *pressure, theta);
        rep.max_flux_residual = std::max(rep.max_flux_residual, flux.max_residual());
        rep.max_flux_residual_ratio =
            std::max(rep.max_flux_residual_ratio, flux.max_residual() / flux.residual_tolerance());
        op.set_advection(AdvectionField::from_flux(flux));
      }
    }
    for (std::size_t j = 1; j <= tp.fine_per_coarse; ++j) {
      const TransportStep st{tp.fine_time(n, j - 1), tp.fine_time(n, j)};
      SolveReport sr;
      NodalField next = op.advance(theta, st, nudge_stream, opt.transport_solver, &sr);
      rep.transport_iterations += sr.iterations;
      const double mass = op.audit(theta, next, st, nudge_stream).relative();
      rep.max_mass_residual = std::max(rep.max_mass_residual, mass);
      theta = std::move(next);
      ++k;
      if (opt.keep_fine_states) out.fine.push_back(theta);
      auto sample = measure_sample(theta, st.t_new, k, j == tp.fine_per_coarse, in);
      sample.mass_residual = mass;
      rep.samples.push_back(sample);
      take_snapshots(theta, st.t_new, tp.fine_dt());
    }
    out.coarse.times.push_back(tp.coarse[n]);
    out.coarse.states.push_back(theta);
  }
  for (const auto& s : rep.samples) {
    rep.range_min = std::min(rep.range_min, s.range_min);
    rep.range_max = std::max(rep.range_max, s.range_max);
  }
  return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

inline NodalField true_initial(const Scenario& s, const StructuredMesh& m) {
  return interpolate(m, s.theta0);
}

/// Un-nudged run of the model. Starts from the true initial condition unless
/// `initial` is given. Metrics compare against the analytic solution when the
/// scenario has one. Fine states are kept so the run can serve as a truth.
inline ReferenceRun run_reference(const Scenario& s, const TimePartition& tp,
                                  const NodalField* initial = nullptr, RunOptions opt = {}) {
  const auto mesh = s.mesh();
  detail::SimulationInput in;
  in.scenario = &s;
  in.partition = &tp;
  in.initial = initial ? *initial : true_initial(s, mesh);
  in.mu = 0.0;
  if (s.exact) in.truth = Truth(s.exact);
  opt.keep_fine_states = true;
  auto res = detail::simulate(in, opt);
  return {std::move(res.coarse), std::move(res.fine), std::move(res.snapshots),
          std::move(res.report)};
}

/// Measurements at every coarse level: from the analytic solution when the
/// scenario has one, otherwise from the reference run.
inline ObservationStream make_observations(const Scenario& s, const TimePartition& tp,
                                           const SparseGrid& grid, const ReferenceRun* ref) {
  ObservationStream stream;
  const Truth truth = s.exact ? Truth(s.exact) : Truth(ref);
  if (!truth.available()) throw ConfigError("observations need an analytic solution or a reference run");
  for (std::size_t n = 0; n < tp.coarse.size(); ++n)
    stream.append(tp.coarse[n], truth.measure(grid, tp.coarse[n], n * tp.fine_per_coarse));
  return stream;
}

inline NodalField initial_guess(InitialPolicy policy, const SparseGrid& grid,
                                const ObservationStream& stream) {
  if (policy == InitialPolicy::zero) return NodalField(grid.mesh(), 0.0);
  return grid.reconstruct(stream[0].values);
}

/// Nudged run. Metrics compare against the analytic solution when available,
/// otherwise against `ref` (which must keep fine states).
inline AssimilatedRun run_assimilated(const Scenario& s, const TimePartition& tp,
                                      const SparseGrid& grid, const ObservationStream& stream,
                                      double mu, const NodalField& theta_hat0,
                                      const ReferenceRun* ref = nullptr, RunOptions opt = {}) {
  detail::SimulationInput in;
  in.scenario = &s;
  in.partition = &tp;
  in.initial = theta_hat0;
  in.mu = mu;
  in.grid = &grid;
  in.stream = &stream;
  if (s.exact)
    in.truth = Truth(s.exact);
  else if (ref)
    in.truth = Truth(ref);
  opt.keep_fine_states = false;
  auto res = detail::simulate(in, opt);
  return {std::move(res.coarse), std::move(res.snapshots), std::move(res.report)};
}

inline AssimilatedRun run_assimilated(const Scenario& s, const TimePartition& tp,
                                      const SparseGrid& grid, const ObservationStream& stream,
                                      double mu, InitialPolicy policy,
                                      const ReferenceRun* ref = nullptr, RunOptions opt = {}) {
  return run_assimilated(s, tp, grid, stream, mu, initial_guess(policy, grid, stream), ref,
                         std::move(opt));
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Least-squares slope of log R against t over samples with t in [t_a, t_b].
inline DecayFit fit_decay_rate(const std::vector<MetricSample>& samples, double t_a, double t_b) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : samples) {
    if (s.t < t_a || s.t > t_b) continue;
    if (!(s.R > 0.0) || !std::isfinite(s.R))
      throw std::domain_error("decay fit: R must be positive and finite in the window");
    pts.push_back({s.t, std::log(s.R)});
  }
  if (pts.size() < 3) throw std::domain_error("decay fit: fewer than 3 samples in window");
  const double n = static_cast<double>(pts.size());
  double mt = 0, my = 0;
  for (const auto& [t, y] : pts) {
    mt += t;
    my += y;
  }
  mt /= n;
  my /= n;
  double stt = 0, sty = 0, syy = 0;
  for (const auto& [t, y] : pts) {
    stt += (t - mt) * (t - mt);
    sty += (t - mt) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(stt > 0.0)) throw std::domain_error("decay fit: degenerate time window");
  DecayFit f;
  f.rate = sty / stt;
  f.intercept = my - f.rate * mt;
  f.r_squared = syy > 0.0 ? (sty * sty) / (stt * syy) : 1.0;
  f.t_a = t_a;
  f.t_b = t_b;
  f.samples = pts.size();
  return f;
}

inline DecayFit fit_decay_rate(const RunReport& report, double t_a, double t_b) {
  return fit_decay_rate(report.samples, t_a, t_b);
}

/// Default pre-plateau window [t_0, t*]: t* is the first coarse sample whose
/// relative change from the previous coarse sample is below `flat` (at least
/// the third coarse sample, so the window holds three points).
inline std::pair<double, double> default_fit_window(const RunReport& report, double flat = 0.05) {
  const auto cs = report.coarse_samples();
  if (cs.size() < 3) throw std::domain_error("decay fit: fewer than 3 coarse samples");
  std::size_t end = cs.size() - 1;
  for (std::size_t i = 1; i < cs.size(); ++i) {
    const double rel = std::abs(cs[i].R - cs[i - 1].R) / std::max(cs[i - 1].R, 1e-300);
    if (rel < flat) {
      end = i;
      break;
    }
  }
  end = std::max<std::size_t>(end, 2);
  return {cs.front().t, cs[end].t};
}

inline DecayFit fit_decay_rate(const RunReport& report) {
  const auto [a, b] = default_fit_window(report);
  return fit_decay_rate(report.samples, a, b);
}

/// Mean R over the last quarter of the samples.
inline double plateau_R(const RunReport& report) {
  const auto& s = report.samples;
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t start = s.size() - std::max<std::size_t>(1, s.size() / 4);
  double sum = 0;
  for (std::size_t i = start; i < s.size(); ++i) sum += s[i].R;
  return sum / static_cast<double>(s.size() - start);
}

/// Mean of R(P_hbar theta) over the coarse samples in the last quarter of the run.
inline double plateau_R_interp(const RunReport& report) {
  const auto& s = report.samples;
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double t0 = s.front().t, t1 = s.back().t, cut = t1 - 0.25 * (t1 - t0);
  double sum = 0;
  std::size_t c = 0;
  for (const auto& x : s)
    if (x.coarse && x.t >= cut - 1e-12 * std::max(1.0, std::abs(t1)) && std::isfinite(x.R_interp)) {
      sum += x.R_interp;
      ++c;
    }
  return c ? sum / static_cast<double>(c) : std::numeric_limits<double>::quiet_NaN();
}

struct SawtoothStats {
  std::size_t intervals = 0;
  std::size_t satisfied = 0;
  double fraction() const { return intervals ? static_cast<double>(satisfied) / intervals : 0.0; }
};

/// For every coarse interval, compares R at the coarse level t_n with R at
/// the preceding fine level s_{m-1,n}.
inline SawtoothStats sawtooth(const RunReport& report) {
  SawtoothStats st;
  const auto& s = report.samples;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!s[i].coarse || s[i - 1].coarse) continue;
    ++st.intervals;
    if (s[i].R <= s[i - 1].R) ++st.satisfied;
  }
  return st;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
  double mu = 0.0;
  double hbar = 0.0;
  bool ok = false;
  double plateau_R = std::numeric_limits<double>::quiet_NaN();
  double plateau_R_interp = std::numeric_limits<double>::quiet_NaN();
  double rate = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  std::string error;
  std::optional<RunReport> report;
};

/// Independent assimilated runs over the (mu, hbar) grid. The reference run
/// is shared; rows come back sorted by hbar descending, then mu ascending.
/// Parallel runs are batched to the hardware thread count.
inline std::vector<SweepRow> mu_sweep(const Scenario& s, const TimePartition& tp,
                                      const std::vector<double>& mus,
                                      const std::vector<double>& hbars, RunOptions opt = {},
                                      bool parallel = true) {
  if (mus.empty() || hbars.empty()) throw ConfigError("sweep: empty mu or hbar list");
  std::optional<ReferenceRun> ref;
  if (!s.exact) ref = run_reference(s, tp, nullptr, opt);
  const auto mesh = s.mesh();
  auto one = [&](double mu, double hbar) {
    SweepRow row;
    row.mu = mu;
    row.hbar = hbar;
    try {
      const SparseGrid grid(mesh, hbar, s.functional);
      const auto stream = make_observations(s, tp, grid, ref ? &*ref : nullptr);
      auto run = run_assimilated(s, tp, grid, stream, mu, s.initial, ref ? &*ref : nullptr, opt);
      row.plateau_R = plateau_R(run.report);
      row.report = run.report;
      row.plateau_R_interp = plateau_R_interp(run.report);
      try {
        const auto f = fit_decay_rate(run.report);
        row.rate = f.rate;
        row.r_squared = f.r_squared;
      } catch (const std::domain_error&) {
      }
      row.ok = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    return row;
  };
  std::vector<std::pair<double, double>> jobs;
  for (double h : hbars)
    for (double m : mus) jobs.push_back({m, h});
  std::vector<SweepRow> rows;
  if (parallel) {
    const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t b = 0; b < jobs.size(); b += width) {
      std::vector<std::future<SweepRow>> fut;
      for (std::size_t i = b; i < std::min(jobs.size(), b + width); ++i)
        fut.push_back(std::async(std::launch::async, one, jobs[i].first, jobs[i].second));
      for (auto& f : fut) rows.push_back(f.get());
    }
  } else {
    for (const auto& [m, h] : jobs) rows.push_back(one(m, h));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.hbar != b.hbar ? a.hbar > b.hbar : a.mu < b.mu;
  });
  return rows;
}

} // namespace cda
