// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cda/cda.hpp"
#include "oracle_case.hpp"

using namespace cda;

namespace {

// Pinned tolerances.
constexpr double kEx2Target = 0.89, kEx2Band = 0.15; // reference asymptote, percent
constexpr double kEx2Threshold = 1.0;                 // percent
constexpr std::size_t kEx2MaxSteps = 10;
constexpr double kEx2RunSeconds = 30.0;
constexpr double kEx1MinR2 = 0.95;
constexpr double kEx1SmallMu = 0.1;
constexpr double kFluxFactor = 1e-10; // times max(1, ||g||)
constexpr double kRawFluxFloor = 1e-4;
constexpr double kRateTarget = 2.0, kRateBand = 0.2;
constexpr int kSignFields = 1000;
constexpr double kRangeSlack = 1e-8;
constexpr double kOracleTol = 1e-12;
constexpr double kSawtoothFraction = 0.8;

struct Clock {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void report(int id, const char* title, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("criterion %d %s  %s: %s\n", id, ok ? "PASS" : "FAIL", title, detail.c_str());
  std::fflush(stdout);
}

void guarded(int id, const char* title, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [ok, d] = body();
    report(id, title, ok, d);
  } catch (const std::exception& e) {
    report(id, title, false, std::string("exception: ") + e.what());
  }
}

std::size_t first_step_below(const RunReport& r, double threshold) {
  for (std::size_t k = 0; k < r.samples.size(); ++k)
    if (r.samples[k].R < threshold) return k;
  return static_cast<std::size_t>(-1);
}

// Shared between criteria 3, 5 and 8.
struct Example3Runs {
  Scenario s;
  TimePartition tp;
  ReferenceRun ref;
};

} // namespace

int main() {
  std::printf("acceptance (tolerances: ex2 %.2f +/- %.2f %%, <%.1f %% within %zu steps, "
              "R2 >= %.2f, flux %.0e max(1,|g|), raw > %.0e, rate %.1f +/- %.1f, range slack %.0e, "
              "oracle %.0e, sawtooth >= %.0f %%)\n",
              kEx2Target, kEx2Band, kEx2Threshold, kEx2MaxSteps, kEx1MinR2, kFluxFactor,
              kRawFluxFloor, kRateTarget, kRateBand, kRangeSlack, kOracleTol,
              100 * kSawtoothFraction);

  guarded(1, "Example 2 reproduction", [] {
    const auto s = example2();
    const auto tp = partition_of(s);
    const SparseGrid grid(s.mesh(), 0.1);
    const auto obs = make_observations(s, tp, grid, nullptr);
    Clock c;
    const auto ref = run_reference(s, tp);
    const double ref_plateau = plateau_R(ref.report);
    double worst_time = c.seconds();
    bool ok = std::abs(ref_plateau - kEx2Target) <= kEx2Band;
    std::string d = fmt("reference asymptote %.4f %%;", ref_plateau);
    for (double mu : {1.0, 10.0, 100.0}) {
      Clock rc;
      const auto run = run_assimilated(s, tp, grid, obs, mu, InitialPolicy::zero);
      worst_time = std::max(worst_time, rc.seconds());
      const double p = plateau_R(run.report);
      const std::size_t k = first_step_below(run.report, kEx2Threshold);
      const bool fast = k <= kEx2MaxSteps;
      ok = ok && fast && p < ref_plateau;
      d += fmt(" mu=%g: <1%% at step %zu%s, asymptote %.4f %%%s;", mu, k, fast ? "" : " (late)", p,
               p < ref_plateau ? "" : " (not below reference)");
    }
    ok = ok && worst_time < kEx2RunSeconds;
    d += fmt(" slowest run %.1f s", worst_time);
    return std::pair{ok, d};
  });

  guarded(2, "Example 1 Goldilocks ordering (100x100)", [] {
    const auto s = example1();
    const auto tp = partition_of(s);
    const SparseGrid grid(s.mesh(), 10.0 * s.mesh().hx());
    const auto obs = make_observations(s, tp, grid, nullptr);
    struct Row {
      double mu;
      DecayFit fit;
      double R0;
    };
    std::vector<Row> rows;
    for (double mu : {kEx1SmallMu, 1.0, 10.0, 100.0, 1000.0}) {
      const auto run = run_assimilated(s, tp, grid, obs, mu, InitialPolicy::zero);
      rows.push_back({mu, fit_decay_rate(run.report), run.report.samples.front().R});
    }
    bool r0 = true;
    for (const auto& r : rows) r0 = r0 && r.R0 == 100.0;
    const double small = std::abs(rows.front().fit.rate);
    std::string d = fmt("R(0) = 100 %% exactly: %s;", r0 ? "yes" : "no");
    bool found = false;
    for (const auto& r : rows) {
      d += fmt(" mu=%g rate %.3f R2 %.3f;", r.mu, r.fit.rate, r.fit.r_squared);
      if (r.mu != kEx1SmallMu && r.fit.rate < 0 && r.fit.r_squared >= kEx1MinR2 &&
          std::abs(r.fit.rate) > small)
        found = true;
    }
    d += found ? " a mu beats mu=0.1 with a clean fit" : " no mu beats mu=0.1 with a clean fit";
    return std::pair{r0 && found, d};
  });

  std::optional<Example3Runs> ex3;
  guarded(3, "local conservation (Example 3 stand-in, 240x240)", [&] {
    Example3Runs r{example3(), {}, {}};
    r.tp = partition_of(r.s);
    r.ref = run_reference(r.s, r.tp);
    const auto mesh = r.s.mesh();
    const PressureProblem pb{mesh, r.s.mobility, r.s.pressure_source, r.s.pressure_dirichlet};
    const RunOptions opt;
    double worst_ratio = 0.0, min_raw = 1e300;
    for (std::size_t n = 0; n + 1 < r.ref.coarse.states.size(); ++n) {
      const auto& th = r.ref.coarse.states[n];
      const auto p = solve_pressure(pb, th, opt.pressure_solver);
      const auto flux = postprocess_flux(pb, p, th);
      const double tol = kFluxFactor * std::max(1.0, flux.source_norm);
      worst_ratio = std::max(worst_ratio, flux.max_residual() / tol);
      double raw = 0.0;
      for (double v : raw_fem_cv_residual(pb, p, th)) raw = std::max(raw, std::abs(v));
      min_raw = std::min(min_raw, raw);
    }
    const bool ok = worst_ratio <= 1.0 && min_raw > kRawFluxFloor &&
                    r.ref.report.max_flux_residual_ratio <= 1.0;
    ex3 = std::move(r);
    return std::pair{ok, fmt("%zu coarse steps; worst postprocessed residual %.3g x tolerance; "
                             "smallest per-step raw FEM residual %.3g",
                             ex3->tp.num_coarse(), worst_ratio, min_raw)};
  });

  guarded(4, "interpolation operator", [] {
    const double pi = std::numbers::pi;
    const auto m = build_mesh(120, 120, 1.0, 1.0, BoundarySpec::all_dirichlet());
    const auto f = [pi](Point x) { return std::sin(pi * x.x) * std::sin(pi * x.y); };
    const auto u = interpolate(m, f);
    std::vector<std::pair<double, double>> pts;
    for (double h : {1.0 / 5, 1.0 / 10, 1.0 / 20})
      pts.push_back({std::log(h), std::log(l2_distance(apply_Ph(SparseGrid(m, h), u), f))});
    double mx = 0, my = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) mx += x / 3, my += y / 3;
    for (auto [x, y] : pts) sxx += (x - mx) * (x - mx), sxy += (x - mx) * (y - my);
    const double rate = sxy / sxx;
    std::mt19937_64 rng(20240917);
    std::exponential_distribution<double> d(1.0);
    int violations = 0;
    const SparseGrid g(m, 0.1);
    for (int k = 0; k < kSignFields; ++k) {
      NodalField w(m);
      for (auto& v : w.data()) v = (rng() % 5 == 0) ? 0.0 : d(rng);
      for (double v : apply_Ph(g, w).data())
        if (v < 0.0) {
          ++violations;
          break;
        }
    }
    return std::pair{std::abs(rate - kRateTarget) <= kRateBand && violations == 0,
                     fmt("fitted rate %.4f; %d of %d random nonnegative fields lost sign", rate,
                         violations, kSignFields)};
  });

  guarded(5, "hbar monotonicity (Example 3 stand-in, mu fixed)", [&] {
    if (!ex3) throw std::runtime_error("Example 3 reference unavailable");
    const auto& r = *ex3;
    std::vector<double> plateau;
    double interp_largest = 0.0;
    std::string d;
    for (double h : {1.0 / 5, 1.0 / 10, 1.0 / 30}) {
      const SparseGrid g(r.s.mesh(), h);
      const auto obs = make_observations(r.s, r.tp, g, &r.ref);
      const auto run = run_assimilated(r.s, r.tp, g, obs, r.s.mu, r.s.initial, &r.ref);
      plateau.push_back(plateau_R(run.report));
      if (plateau.size() == 1) interp_largest = plateau_R_interp(run.report);
      d += fmt("%shbar=%.4g: plateau R %.4g %%, interpolation %.4g %%;", d.empty() ? "" : " ", h, plateau.back(),
               plateau_R_interp(run.report));
    }
    const bool mono = plateau[0] >= plateau[1] && plateau[1] >= plateau[2];
    const bool beats = plateau[0] < interp_largest;
    return std::pair{mono && beats, d + (mono ? " nonincreasing" : " NOT monotone") +
                                        (beats ? ", largest hbar beats interpolation"
                                               : ", largest hbar does not beat interpolation")};
  });

  guarded(6, "physical range (diffusion-reaction, A7)", [] {
    const auto s = diffusion_reaction();
    const auto tp = partition_of(s);
    const auto ref = run_reference(s, tp);
    const SparseGrid g(s.mesh(), s.hbar);
    const auto obs = make_observations(s, tp, g, &ref);
    double lo = 1e300, hi = -1e300;
    std::string d;
    for (double mu : {1.0, 10.0, 100.0}) {
      const auto run = run_assimilated(s, tp, g, obs, mu, InitialPolicy::interpolated, &ref);
      lo = std::min(lo, run.report.range_min);
      hi = std::max(hi, run.report.range_max);
    }
    const bool ok = lo >= -kRangeSlack && hi <= 1.0 + kRangeSlack;
    return std::pair{ok, fmt("mu in {1,10,100}, %zu fine steps each: theta-hat in [%.10g, %.10g]",
                             tp.num_fine(), lo, hi)};
  });

  guarded(7, "oracle equivalence (4x4, one coarse step)", [] {
    const auto c = oracle::compare_coarse_step();
    return std::pair{c.max() <= kOracleTol,
                     fmt("max entrywise gap %.3g (pressure %.2g, flux %.2g, transport %.2g, state %.2g)",
                         c.max(), std::max({c.pressure_matrix, c.pressure_rhs, c.pressure}),
                         std::max(c.psi, c.segment_flux), std::max(c.transport_matrix, c.transport_rhs),
                         c.theta)};
  });

  guarded(8, "nudging-off equivalence", [&] {
    auto same = [](const Trajectory& a, const Trajectory& b) {
      if (a.states.size() != b.states.size()) return false;
      for (std::size_t n = 0; n < a.states.size(); ++n)
        if (!(a.states[n] == b.states[n]) || a.times[n] != b.times[n]) return false;
      return true;
    };
    // Example 2 from zero data (prescribed-once Darcy velocity, analytic truth)
    const auto s2 = example2();
    const auto tp2 = partition_of(s2);
    const SparseGrid g2(s2.mesh(), s2.hbar);
    const auto obs2 = make_observations(s2, tp2, g2, nullptr);
    const NodalField zero(s2.mesh(), 0.0);
    const auto ref2 = run_reference(s2, tp2, &zero);
    const auto run2 = run_assimilated(s2, tp2, g2, obs2, 0.0, zero);
    bool samples_same = ref2.report.samples.size() == run2.report.samples.size();
    for (std::size_t k = 0; samples_same && k < ref2.report.samples.size(); ++k)
      samples_same = ref2.report.samples[k].R == run2.report.samples[k].R;
    const bool a = same(ref2.coarse, run2.coarse) && samples_same;
    // Example 3 from the true initial data (coarse-step Darcy updates)
    bool b = false;
    if (ex3) {
      const auto& r = *ex3;
      const SparseGrid g(r.s.mesh(), r.s.hbar);
      const auto obs = make_observations(r.s, r.tp, g, &r.ref);
      const auto run = run_assimilated(r.s, r.tp, g, obs, 0.0, r.ref.coarse.states.front(), &r.ref);
      b = same(r.ref.coarse, run.coarse);
    }
    return std::pair{a && b, fmt("example 2 (%zu steps): %s; example 3 (%zu steps): %s",
                                 tp2.num_fine(), a ? "bitwise equal" : "DIFFERENT",
                                 ex3 ? ex3->tp.num_fine() : 0, b ? "bitwise equal" : "DIFFERENT")};
  });
  ex3.reset();

  guarded(9, "Example 4 smoke (30 days, stand-in, 240x240)", [] {
    const auto s = example4();
    const auto tp = partition_of(s);
    const auto ref = run_reference(s, tp);
    const SparseGrid g(s.mesh(), s.hbar);
    const auto obs = make_observations(s, tp, g, &ref);
    const auto run = run_assimilated(s, tp, g, obs, s.mu, apply_Ph(g, ref.coarse.states.front()), &ref);
    const double rt0 = run.report.samples.front().Rtilde;
    const auto st = sawtooth(run.report);
    const bool done = run.coarse.times.back() == tp.coarse.back();
    const bool ok = done && rt0 == 0.0 && st.fraction() >= kSawtoothFraction;
    return std::pair{ok, fmt("completed to t = %.0f s: %s; R-tilde(0) = %g; sawtooth on %zu of %zu "
                             "coarse steps; theta-hat range [%.4g, %.4g] (monitored)",
                             tp.coarse.back(), done ? "yes" : "no", rt0, st.satisfied, st.intervals,
                             run.report.range_min, run.report.range_max)};
  });

  std::printf("%s: %d criterion(s) failed\n", failures ? "RED" : "GREEN", failures);
  return failures ? 1 : 0;
}
