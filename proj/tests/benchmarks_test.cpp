#include "mmf/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace mmf {
namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

TEST(MakeSystem, TransitionAndMeasurementValues) {
  const SystemSpec quad = make_system(SystemId::ungm_quadratic);
  EXPECT_DOUBLE_EQ(quad.model.transition(scalar(0.0), 1)(0), 8.0);
  EXPECT_DOUBLE_EQ(quad.model.measurement(scalar(2.0))(0), 0.2);
  // x = 1 at n = 2: 0.5 + 12.5 + 8 cos(1.2).
  EXPECT_NEAR(quad.model.transition(scalar(1.0), 2)(0), 13.0 + 8.0 * std::cos(1.2), 1e-14);

  const SystemSpec stat = make_system(SystemId::stationary_sin);
  for (int n : {1, 2, 17}) EXPECT_DOUBLE_EQ(stat.model.transition(scalar(0.0), n)(0), 0.0);
  EXPECT_NEAR(stat.model.measurement(scalar(0.5))(0), 5.0 * std::sin(0.5), 1e-15);

  const SystemSpec usin = make_system(SystemId::ungm_sin);
  EXPECT_DOUBLE_EQ(usin.model.transition(scalar(0.0), 1)(0), 8.0);
  EXPECT_NEAR(usin.model.measurement(scalar(1.0))(0), 5.0 * std::sin(1.0), 1e-15);
}

TEST(MakeSystem, SharedSettings) {
  for (SystemId id : {SystemId::ungm_quadratic, SystemId::ungm_sin, SystemId::stationary_sin}) {
    const SystemSpec s = make_system(id);
    EXPECT_EQ(s.prior.mean()(0), 0.0);
    EXPECT_EQ(s.prior.cov()(0, 0), 1.0);
    EXPECT_EQ(s.model.process_noise(0, 0), 1.0);
    EXPECT_EQ(s.model.obs_noise(0, 0), 1.0);
    EXPECT_TRUE(s.model.has_jacobians());
    EXPECT_EQ(parse_system_id(to_string(id)), id);
  }
  EXPECT_THROW(parse_system_id("ungm"), std::invalid_argument);
}

TEST(MakeSystem, JacobiansMatchFiniteDifferences) {
  const double h = 1e-6;
  for (SystemId id : {SystemId::ungm_quadratic, SystemId::ungm_sin, SystemId::stationary_sin}) {
    const SystemSpec s = make_system(id);
    for (double x : {-4.0, -0.3, 0.0, 1.1, 6.0}) {
      const double df = (s.model.transition(scalar(x + h), 3)(0) - s.model.transition(scalar(x - h), 3)(0)) / (2 * h);
      const double dh = (s.model.measurement(scalar(x + h))(0) - s.model.measurement(scalar(x - h))(0)) / (2 * h);
      EXPECT_NEAR(s.model.transition_jacobian(scalar(x), 3)(0, 0), df, 1e-6);
      EXPECT_NEAR(s.model.measurement_jacobian(scalar(x))(0, 0), dh, 1e-6);
    }
  }
  const SystemSpec quad = make_system(SystemId::ungm_quadratic);
  EXPECT_DOUBLE_EQ(quad.model.transition_jacobian(scalar(0.0), 1)(0, 0), 25.5);
}

TEST(Simulate, DeterministicRecursionWithoutNoise) {
  SystemSpec spec = make_system(SystemId::ungm_quadratic);
  spec.model.process_noise.setZero();
  spec.model.obs_noise.setZero();
  spec.prior = Gaussian::scalar(0.5, 0.0);
  const Trajectory t = simulate(spec, 20, 9);
  double x = 0.5;
  for (int n = 1; n <= 20; ++n) {
    x = 0.5 * x + 25 * x / (1 + x * x) + 8 * std::cos(1.2 * (n - 1));
    EXPECT_DOUBLE_EQ(t.states(n - 1, 0), x);
    EXPECT_DOUBLE_EQ(t.observations(n - 1, 0), x * x / 20);
  }
}

TEST(Simulate, SameSeedSameTrajectory) {
  const SystemSpec spec = make_system(SystemId::ungm_sin);
  const Trajectory a = simulate(spec, 100, 77);
  const Trajectory b = simulate(spec, 100, 77);
  const Trajectory c = simulate(spec, 100, 78);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.observations, b.observations);
  EXPECT_NE(a.states, c.states);
}

TEST(Simulate, NoiseHasUnitVariance) {
  // One-step process noise: x_1 - f(x_0) with x_0 = 0 fixed.
  SystemSpec spec = make_system(SystemId::stationary_sin);
  spec.prior = Gaussian::scalar(0.0, 0.0);
  double sum = 0.0;
  double sq = 0.0;
  const int samples = 100000;
  for (int i = 0; i < samples; ++i) {
    const double w = simulate(spec, 1, static_cast<std::uint64_t>(i) + 1000).states(0, 0);
    sum += w;
    sq += w * w;
  }
  const double mean = sum / samples;
  EXPECT_NEAR(sq / samples - mean * mean, 1.0, 0.02);
}

TEST(ComputeMetrics, RmseAndNll) {
  const std::vector<Vector> truth{scalar(1), scalar(-2), scalar(3.5)};
  EXPECT_DOUBLE_EQ(compute_metrics(truth, truth, {0, 0, 0}).rmse, 0.0);

  std::vector<Vector> off;
  for (const Vector& t : truth) off.push_back(t + scalar(1.0));
  EXPECT_DOUBLE_EQ(compute_metrics(off, truth, {0, 0, 0}).rmse, 1.0);

  const double lp = -0.5 * std::log(2 * M_PI);
  const MetricsResult m = compute_metrics(truth, truth, {lp, lp, lp});
  EXPECT_NEAR(m.nll_mean, 0.918939, 1e-6);
  EXPECT_EQ(m.nll_sum, m.nll_mean * 3);
}

TEST(ComputeMetrics, RmseIgnoresOrder) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  std::vector<Vector> est;
  std::vector<Vector> truth;
  for (int i = 0; i < 50; ++i) {
    est.push_back(scalar(normal(rng)));
    truth.push_back(scalar(normal(rng)));
  }
  const double base = compute_metrics(est, truth, {}).rmse;
  std::vector<std::size_t> order(50);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Vector> e2;
  std::vector<Vector> t2;
  for (std::size_t i : order) {
    e2.push_back(est[i]);
    t2.push_back(truth[i]);
  }
  EXPECT_NEAR(compute_metrics(e2, t2, {}).rmse, base, 1e-14);
}

TEST(Evaluate, CompletesAndReportsFiniteMetrics) {
  const SystemSpec spec = make_system(SystemId::stationary_sin);
  const Trajectory traj = simulate(spec, 30, 5);
  for (FilterKind k : {FilterKind::ekf, FilterKind::ukf, FilterKind::pf, FilterKind::mmf}) {
    int calls = 0;
    const MetricsResult r =
        evaluate(spec, k, FilterSettings{}, traj, [&](int, const FilterStepOutput&) { ++calls; });
    EXPECT_FALSE(r.diverged) << to_string(k);
    EXPECT_EQ(r.completed_steps, 30);
    EXPECT_EQ(calls, 30);
    EXPECT_GE(r.rmse, 0.0);
    EXPECT_TRUE(std::isfinite(r.nll_mean));
    EXPECT_EQ(r.nll_sum, r.nll_mean * 30);
  }
}

TEST(Evaluate, FailedStepMarksDivergence) {
  SystemSpec spec = make_system(SystemId::stationary_sin);
  const Trajectory traj = simulate(spec, 10, 5);
  spec.model.transition = [](const Vector& x, int n) -> Vector {
    if (n == 4) return Vector::Constant(1, NAN);
    return x;
  };
  const MetricsResult r = evaluate(spec, FilterKind::ukf, FilterSettings{}, traj);
  EXPECT_TRUE(r.diverged);
  EXPECT_EQ(r.completed_steps, 3);
  EXPECT_TRUE(std::isfinite(r.rmse));
}

TEST(RunExperiment, SingleRunHasZeroStd) {
  const SystemSpec spec = make_system(SystemId::ungm_sin);
  const ExperimentResult r = run_experiment(spec, {FilterKind::ukf}, FilterSettings{}, 1, 10, 3);
  ASSERT_EQ(r.summary.size(), 1u);
  EXPECT_EQ(r.summary[0].rmse_std, 0.0);
  EXPECT_EQ(r.summary[0].nll_mean_std, 0.0);
}

TEST(RunExperiment, PairedSeedsAndDeterminism) {
  const SystemSpec spec = make_system(SystemId::ungm_quadratic);
  const std::vector<FilterKind> filters{FilterKind::mmf, FilterKind::ukf, FilterKind::mmf};
  const ExperimentResult r = run_experiment(spec, filters, FilterSettings{}, 4, 15, 100);
  ASSERT_EQ(r.runs.size(), 12u);
  for (const RunRecord& rec : r.runs) EXPECT_EQ(rec.seed, 100u + static_cast<std::uint64_t>(rec.run_id));
  // The same filter listed twice produces identical columns.
  for (int k = 0; k < 4; ++k) {
    const auto& a = r.runs[static_cast<std::size_t>(3 * k)].metrics;
    const auto& b = r.runs[static_cast<std::size_t>(3 * k + 2)].metrics;
    EXPECT_EQ(a.rmse, b.rmse);
    EXPECT_EQ(a.nll_mean, b.nll_mean);
  }
  const ExperimentResult again = run_experiment(spec, filters, FilterSettings{}, 4, 15, 100);
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    EXPECT_EQ(r.runs[i].metrics.rmse, again.runs[i].metrics.rmse);
    EXPECT_EQ(r.runs[i].metrics.nll_mean, again.runs[i].metrics.nll_mean);
  }
}

TEST(RunExperiment, SummaryIsMeanOfRuns) {
  const SystemSpec spec = make_system(SystemId::stationary_sin);
  const ExperimentResult r =
      run_experiment(spec, {FilterKind::ekf, FilterKind::mmf}, FilterSettings{}, 5, 20, 8);
  for (const SummaryRow& row : r.summary) {
    std::vector<double> rmse;
    for (const RunRecord& rec : r.runs) {
      if (rec.filter == row.filter) rmse.push_back(rec.metrics.rmse);
    }
    double sum = 0.0;
    for (double v : rmse) sum += v;
    EXPECT_NEAR(row.rmse_mean, sum / 5, 1e-12);
  }
}

TEST(MeanAndStd, SampleConvention) {
  const auto [m, s] = mean_and_std({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m, 2.5);
  EXPECT_NEAR(s, std::sqrt(5.0 / 3.0), 1e-15);
}

}  // namespace
}  // namespace mmf
