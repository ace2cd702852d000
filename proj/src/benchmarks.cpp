#include "mmf/benchmarks.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace mmf {

namespace {

constexpr std::uint64_t kParticleSeedSalt = 0x9E3779B97F4A7C15ULL;

double growth(double x) { return 0.5 * x + 25.0 * x / (1.0 + x * x); }

double growth_derivative(double x) {
  const double s = 1.0 + x * x;
  return 0.5 + 25.0 * (1.0 - x * x) / (s * s);
}

Vector scalar(double v) { return Vector::Constant(1, v); }
Matrix scalar_matrix(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

std::string to_string(SystemId id) {
  switch (id) {
    case SystemId::ungm_quadratic: return "ungm-quadratic";
    case SystemId::ungm_sin: return "ungm-sin";
    case SystemId::stationary_sin: return "stationary-sin";
  }
  return "unknown";
}

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::ekf: return "ekf";
    case FilterKind::ukf: return "ukf";
    case FilterKind::pf: return "pf";
    case FilterKind::mmf: return "mmf";
  }
  return "unknown";
}

SystemId parse_system_id(std::string_view text) {
  for (SystemId id : {SystemId::ungm_quadratic, SystemId::ungm_sin, SystemId::stationary_sin}) {
    if (text == to_string(id)) return id;
  }
  throw std::invalid_argument("unknown system '" + std::string(text) + "'");
}

FilterKind parse_filter_kind(std::string_view text) {
  for (FilterKind k : {FilterKind::ekf, FilterKind::ukf, FilterKind::pf, FilterKind::mmf}) {
    if (text == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown filter '" + std::string(text) + "'");
}

SystemSpec make_system(SystemId id) {
  DynamicalModel m;
  m.state_dim = 1;
  m.obs_dim = 1;
  m.process_noise = scalar_matrix(1.0);
  m.obs_noise = scalar_matrix(1.0);

  if (id == SystemId::stationary_sin) {
    m.transition = [](const Vector& x, int) -> Vector { return scalar(growth(x(0))); };
  } else {
    // n = 1 is the first transition, where the cosine term is 8 cos(0).
    m.transition = [](const Vector& x, int n) -> Vector {
      return scalar(growth(x(0)) + 8.0 * std::cos(1.2 * (n - 1)));
    };
  }
  m.transition_jacobian = [](const Vector& x, int) -> Matrix {
    return scalar_matrix(growth_derivative(x(0)));
  };

  if (id == SystemId::ungm_quadratic) {
    m.measurement = [](const Vector& x) -> Vector { return scalar(x(0) * x(0) / 20.0); };
    m.measurement_jacobian = [](const Vector& x) -> Matrix { return scalar_matrix(x(0) / 10.0); };
  } else {
    m.measurement = [](const Vector& x) -> Vector { return scalar(5.0 * std::sin(x(0))); };
    m.measurement_jacobian = [](const Vector& x) -> Matrix {
      return scalar_matrix(5.0 * std::cos(x(0)));
    };
  }
  return {id, std::move(m), Gaussian::scalar(0.0, 1.0)};
}

Trajectory simulate(const SystemSpec& spec, int steps, std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("simulate: steps must be >= 1");
  const DynamicalModel& m = spec.model;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto draw = [&](Eigen::Index dim) {
    Vector z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) z(i) = normal(rng);
    return z;
  };
  const Matrix q_root = cov_sqrt(m.process_noise);
  const Matrix r_root = cov_sqrt(m.obs_noise);

  Trajectory traj;
  traj.seed = seed;
  traj.states.resize(steps, m.state_dim);
  traj.observations.resize(steps, m.obs_dim);
  Vector x = spec.prior.mean() + cov_sqrt(spec.prior.cov()) * draw(m.state_dim);
  for (int n = 1; n <= steps; ++n) {
    x = m.transition(x, n) + q_root * draw(m.state_dim);
    const Vector y = m.measurement(x) + r_root * draw(m.obs_dim);
    traj.states.row(n - 1) = x.transpose();
    traj.observations.row(n - 1) = y.transpose();
  }
  return traj;
}

MetricsResult compute_metrics(const std::vector<Vector>& estimates, const std::vector<Vector>& truths,
                              const std::vector<double>& log_predictive) {
  if (estimates.size() != truths.size()) {
    throw std::invalid_argument("compute_metrics: estimate and truth counts differ");
  }
  MetricsResult r;
  r.completed_steps = static_cast<int>(estimates.size());
  if (estimates.empty()) {
    r.rmse = r.nll_mean = r.nll_sum = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) sq += (estimates[i] - truths[i]).squaredNorm();
  r.rmse = std::sqrt(sq / static_cast<double>(estimates.size()));

  if (log_predictive.empty()) {
    r.nll_mean = r.nll_sum = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  double total = 0.0;
  for (double lp : log_predictive) total += lp;
  const double count = static_cast<double>(log_predictive.size());
  r.nll_mean = -total / count;
  r.nll_sum = r.nll_mean * count;
  return r;
}

std::unique_ptr<RecursiveFilter> make_filter(const SystemSpec& spec, FilterKind kind,
                                             const FilterSettings& settings, std::uint64_t seed) {
  switch (kind) {
    case FilterKind::ekf: return make_ekf_filter(spec.model);
    case FilterKind::ukf: return make_ukf_filter(spec.model, settings.mmf.ut);
    case FilterKind::pf:
      return make_particle_filter(spec.model, settings.particles, seed ^ kParticleSeedSalt);
    case FilterKind::mmf: return make_mmf_filter(spec.model, settings.mmf);
  }
  throw std::invalid_argument("make_filter: unknown filter kind");
}

MetricsResult evaluate(const SystemSpec& spec, FilterKind kind, const FilterSettings& settings,
                       const Trajectory& trajectory, const StepObserver& observer) {
  auto filter = make_filter(spec, kind, settings, trajectory.seed);
  filter->reset(spec.prior);

  std::vector<Vector> estimates;
  std::vector<Vector> truths;
  std::vector<double> log_predictive;
  bool diverged = false;
  for (int n = 1; n <= trajectory.steps(); ++n) {
    const Vector y = trajectory.observations.row(n - 1).transpose();
    try {
      FilterStepOutput out = filter->step(y, n);
      estimates.push_back(out.state_estimate);
      truths.push_back(trajectory.states.row(n - 1).transpose());
      log_predictive.push_back(out.predictive_obs_log_density);
      if (observer) observer(n, out);
    } catch (const std::exception&) {
      diverged = true;
      break;
    }
  }
  MetricsResult r = compute_metrics(estimates, truths, log_predictive);
  r.diverged = diverged;
  return r;
}

std::pair<double, double> mean_and_std(const std::vector<double>& values) {
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

ExperimentResult run_experiment(const SystemSpec& spec, const std::vector<FilterKind>& filters,
                                const FilterSettings& settings, int runs, int steps,
                                std::uint64_t base_seed, const TraceSink& trace) {
  if (runs < 1) throw std::invalid_argument("run_experiment: runs must be >= 1");
  ExperimentResult result;
  result.runs.reserve(static_cast<std::size_t>(runs) * filters.size());
  for (int k = 0; k < runs; ++k) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);
    const Trajectory traj = simulate(spec, steps, seed);
    for (FilterKind kind : filters) {
      StepObserver observer;
      if (trace) {
        observer = [&](int n, const FilterStepOutput& out) {
          const Vector truth = traj.states.row(n - 1).transpose();
          const Vector y = traj.observations.row(n - 1).transpose();
          trace(TraceEvent{k, kind, n, truth, y, out});
        };
      }
      result.runs.push_back({k, spec.id, kind, seed, evaluate(spec, kind, settings, traj, observer)});
    }
  }

  // Runs with no completed step have no metrics; they only count as divergences.
  for (FilterKind kind : filters) {
    std::vector<double> rmse;
    std::vector<double> nll;
    int divergences = 0;
    for (const RunRecord& rec : result.runs) {
      if (rec.filter != kind) continue;
      if (rec.metrics.diverged) ++divergences;
      if (std::isfinite(rec.metrics.rmse)) rmse.push_back(rec.metrics.rmse);
      if (std::isfinite(rec.metrics.nll_mean)) nll.push_back(rec.metrics.nll_mean);
    }
    const auto [rmse_mean, rmse_std] = mean_and_std(rmse);
    const auto [nll_mean, nll_std] = mean_and_std(nll);
    result.summary.push_back({spec.id, kind, runs, rmse_mean, rmse_std, nll_mean, nll_std, divergences});
  }
  return result;
}

}  // namespace mmf
