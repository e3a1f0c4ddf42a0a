#include <gtest/gtest.h>

#include "cda/driver.hpp"
#include "cda/scenarios.hpp"

using namespace cda;

namespace {
// Example 2 shrunk so the whole file stays fast.
Scenario small_example2() {
  auto s = example2();
  s.nx = s.ny = 20;
  s.t_end = 0.2;
  return s;
}

MetricSample at(double t, double R, bool coarse = true) {
  MetricSample s;
  s.t = t;
  s.R = R;
  s.coarse = coarse;
  return s;
}
} // namespace

TEST(Driver, TimePartition) {
  const auto tp = TimePartition::uniform(1.0, 0.02, 10);
  EXPECT_EQ(tp.num_coarse(), 50u);
  EXPECT_EQ(tp.num_fine(), 500u);
  EXPECT_EQ(tp.fine_time(3, 0), tp.coarse[2]);
  EXPECT_EQ(tp.fine_time(3, 10), tp.coarse[3]);
  EXPECT_NEAR(tp.fine_dt(), 0.002, 1e-15);
  EXPECT_THROW(TimePartition::uniform(1.0, 0.3, 1), ConfigError);
}

TEST(Driver, DecayFitExactExponential) {
  std::vector<MetricSample> s;
  for (int k = 0; k <= 20; ++k) s.push_back(at(0.05 * k, 100.0 * std::exp(-2.0 * 0.05 * k)));
  const auto f = fit_decay_rate(s, 0.0, 1.0);
  EXPECT_NEAR(f.rate, -2.0, 1e-6);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 100.0, 1e-9);
  EXPECT_EQ(f.samples, 21u);
}

TEST(Driver, DecayFitConstant) {
  std::vector<MetricSample> s;
  for (int k = 0; k <= 5; ++k) s.push_back(at(k, 3.0));
  EXPECT_EQ(fit_decay_rate(s, 0, 5).rate, 0.0);
  EXPECT_THROW(fit_decay_rate(s, 0, 1), std::domain_error);
}

TEST(Driver, DefaultWindowStopsAtPlateau) {
  RunReport r;
  for (int k = 0; k <= 10; ++k) r.samples.push_back(at(k, k < 4 ? 100.0 * std::pow(0.5, k) : 12.5));
  const auto [a, b] = default_fit_window(r);
  EXPECT_EQ(a, 0.0);
  EXPECT_EQ(b, 4.0);
}

TEST(Driver, PlateauAndSawtooth) {
  RunReport r;
  r.samples = {at(0, 10), at(0.5, 9, false), at(1, 8), at(1.5, 7, false), at(2, 7.5),
               at(2.5, 4, false), at(3, 4)};
  EXPECT_DOUBLE_EQ(plateau_R(r), 4.0);
  const auto st = sawtooth(r);
  EXPECT_EQ(st.intervals, 3u);
  EXPECT_EQ(st.satisfied, 2u);
}

TEST(Driver, ZeroProblemStaysZero) {
  Scenario s = small_example2();
  s.exact = nullptr;
  s.source = nullptr;
  s.theta0 = [](Point) { return 0.0; };
  const auto ref = run_reference(s, partition_of(s));
  for (const auto& st : ref.fine)
    for (double v : st.data()) EXPECT_EQ(v, 0.0);
}

TEST(Driver, InitialMetrics) {
  const auto s = small_example2();
  const auto tp = partition_of(s);
  const SparseGrid grid(s.mesh(), s.hbar);
  const auto obs = make_observations(s, tp, grid, nullptr);
  const auto zero = run_assimilated(s, tp, grid, obs, 10.0, InitialPolicy::zero);
  EXPECT_EQ(zero.report.samples.front().R, 100.0);
  const auto interp = run_assimilated(s, tp, grid, obs, 10.0, InitialPolicy::interpolated);
  EXPECT_EQ(interp.report.samples.front().Rtilde, 0.0);
  EXPECT_LT(zero.report.samples.back().R, 10.0);
}

TEST(Driver, NudgingOffMatchesReferenceBitwise) {
  auto s = small_example2();
  const auto tp = partition_of(s);
  const SparseGrid grid(s.mesh(), s.hbar);
  const auto obs = make_observations(s, tp, grid, nullptr);
  const NodalField th0(s.mesh(), 0.0);
  const auto ref = run_reference(s, tp, &th0);
  const auto run = run_assimilated(s, tp, grid, obs, 0.0, th0);
  ASSERT_EQ(ref.coarse.states.size(), run.coarse.states.size());
  for (std::size_t n = 0; n < ref.coarse.states.size(); ++n)
    EXPECT_TRUE(ref.coarse.states[n] == run.coarse.states[n]);
  // without feedback the error only decays through dissipation, slower than nudged
  const auto nudged = run_assimilated(s, tp, grid, obs, 100.0, th0);
  const auto a = run.report.coarse_samples(), b = nudged.report.coarse_samples();
  for (std::size_t n = 1; n < a.size(); ++n) EXPECT_GT(a[n].R, b[n].R);
}

TEST(Driver, ReferenceTruthForStandInStyleScenario) {
  Scenario s = diffusion_reaction();
  s.nx = s.ny = 20;
  s.t_end = 0.2;
  const auto tp = partition_of(s);
  const auto ref = run_reference(s, tp);
  EXPECT_EQ(ref.fine.size(), tp.num_fine() + 1);
  const SparseGrid grid(s.mesh(), s.hbar);
  const auto obs = make_observations(s, tp, grid, &ref);
  EXPECT_EQ(obs[1].values, grid.measure(ref.coarse.states[1]));
  const auto run = run_assimilated(s, tp, grid, obs, s.mu, InitialPolicy::interpolated, &ref);
  EXPECT_LT(run.report.samples.back().R, run.report.samples.front().R);
  EXPECT_LE(run.report.max_mass_residual, 1e-10);
  EXPECT_THROW(make_observations(s, tp, grid, nullptr), ConfigError);
}

TEST(Driver, SweepRowsAreSorted) {
  const auto s = small_example2();
  const auto rows = mu_sweep(s, partition_of(s), {10.0, 1.0}, {0.1, 0.2}, {}, true);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].hbar, 0.2);
  EXPECT_EQ(rows[0].mu, 1.0);
  EXPECT_EQ(rows[1].mu, 10.0);
  EXPECT_EQ(rows[3].hbar, 0.1);
  for (const auto& r : rows) EXPECT_TRUE(r.ok) << r.error;
  const auto bad = mu_sweep(s, partition_of(s), {1.0}, {0.13}, {}, false);
  EXPECT_FALSE(bad[0].ok);
  EXPECT_FALSE(bad[0].error.empty());
}
