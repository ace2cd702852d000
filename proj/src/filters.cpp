#include "mmf/filters.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace mmf {

namespace {

struct GaussianUpdate {
  Gaussian posterior;
  double log_likelihood;
};

// Conditions N(mean, cov) on y given the predicted observation moments and
// the state/observation cross-covariance.
GaussianUpdate condition(const Vector& mean, const Matrix& cov, const Vector& obs_mean,
                         const Matrix& obs_cov, const Matrix& cross_cov, const Vector& y) {
  Eigen::LLT<Matrix> llt(obs_cov);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("innovation covariance is not positive definite");
  }
  const Matrix gain = llt.solve(cross_cov.transpose()).transpose();
  const Vector innovation = y - obs_mean;
  Vector post_mean = mean + gain * innovation;
  Matrix post_cov = repair_covariance(cov - gain * obs_cov * gain.transpose());

  const Matrix& l = llt.matrixLLT();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const Vector z = llt.matrixL().solve(innovation);
  const double e = static_cast<double>(y.size());
  const double log_lik = -0.5 * (e * std::log(2.0 * std::numbers::pi) + log_det + z.squaredNorm());
  return {Gaussian(std::move(post_mean), std::move(post_cov)), log_lik};
}

FilterStepOutput single_gaussian_output(Gaussian posterior, double log_lik) {
  Vector estimate = posterior.mean();
  return {GaussianMixture(std::move(posterior)), log_lik, std::move(estimate)};
}

void check_observation(const Vector& y, const DynamicalModel& model) {
  if (y.size() != model.obs_dim) throw std::invalid_argument("observation dimension mismatch");
}

}  // namespace

void DynamicalModel::validate() const {
  if (!transition || !measurement) throw InvariantError("DynamicalModel: f and h are required");
  if (process_noise.rows() != state_dim || process_noise.cols() != state_dim) {
    throw InvariantError("DynamicalModel: Q must be D x D");
  }
  if (obs_noise.rows() != obs_dim || obs_noise.cols() != obs_dim) {
    throw InvariantError("DynamicalModel: R must be E x E");
  }
  // Gaussian's constructor checks symmetry and semi-definiteness.
  Gaussian(Vector::Zero(state_dim), process_noise);
  Gaussian(Vector::Zero(obs_dim), obs_noise);
}

DynamicalModel LinearGaussianModel::as_dynamical_model() const {
  DynamicalModel m;
  m.state_dim = A.rows();
  m.obs_dim = H.rows();
  m.transition = [a = A, b = b](const Vector& x, int) -> Vector { return a * x + b; };
  m.measurement = [h = H](const Vector& x) -> Vector { return h * x; };
  m.process_noise = Q;
  m.obs_noise = R;
  m.transition_jacobian = [a = A](const Vector&, int) -> Matrix { return a; };
  m.measurement_jacobian = [h = H](const Vector&) -> Matrix { return h; };
  return m;
}

MMFConfig MMFConfig::with_components(std::size_t m) {
  MMFConfig cfg;
  cfg.components = m;
  cfg.reduction.target_components = m;
  return cfg;
}

void MMFConfig::validate(Eigen::Index state_dim) const {
  if (components < 1) throw InvariantError("MMFConfig: components must be >= 1");
  if (reduction.target_components != components) {
    throw InvariantError("MMFConfig: reduction target must equal the component count");
  }
  ut.validate(state_dim);
  split.validate(state_dim);
}

GaussianMixture mmf_time_update(const GaussianMixture& posterior, const DynamicalModel& model,
                                const MMFConfig& cfg, int n) {
  const auto f = [&model, n](const Vector& x) -> Vector { return model.transition(x, n); };
  return propagate_mixture(posterior, f, model.process_noise, cfg.ut, cfg.split);
}

MeasurementUpdate mmf_measurement_update_unreduced(const GaussianMixture& predicted,
                                                   const Vector& y, const DynamicalModel& model,
                                                   const MMFConfig& cfg) {
  check_observation(y, model);
  const GaussianMixture split = split_mixture(predicted, cfg.split);

  std::vector<Gaussian> components;
  std::vector<double> log_weights;
  components.reserve(split.size());
  log_weights.reserve(split.size());
  for (std::size_t l = 0; l < split.size(); ++l) {
    const Gaussian& part = split.component(l);
    const UTResult obs = ut_transform(part, model.measurement, cfg.ut, model.obs_noise);
    GaussianUpdate upd = condition(part.mean(), part.cov(), obs.mean, obs.cov, obs.cross_cov, y);
    log_weights.push_back(std::log(split.weight(l)) + upd.log_likelihood);
    components.push_back(std::move(upd.posterior));
  }

  const double log_evidence = log_sum_exp(log_weights);
  if (!std::isfinite(log_evidence)) {
    throw FilterDivergence("observation incompatible with predictive density");
  }
  std::vector<double> weights;
  weights.reserve(log_weights.size());
  for (double lw : log_weights) weights.push_back(std::exp(lw - log_evidence));
  double total = 0.0;
  for (double w : weights) total += w;
  for (double& w : weights) w /= total;

  return {GaussianMixture(std::move(weights), std::move(components)), log_evidence};
}

MeasurementUpdate mmf_measurement_update(const GaussianMixture& predicted, const Vector& y,
                                         const DynamicalModel& model, const MMFConfig& cfg) {
  MeasurementUpdate full = mmf_measurement_update_unreduced(predicted, y, model, cfg);
  return {reduce_mixture(full.posterior, cfg.reduction), full.predictive_obs_log_density};
}

FilterStepOutput mmf_step(const GaussianMixture& posterior, const Vector& y,
                          const DynamicalModel& model, const MMFConfig& cfg, int n) {
  const GaussianMixture predicted = mmf_time_update(posterior, model, cfg, n);
  MeasurementUpdate upd = mmf_measurement_update(predicted, y, model, cfg);
  Vector estimate = mixture_moments(upd.posterior).mean;
  return {std::move(upd.posterior), upd.predictive_obs_log_density, std::move(estimate)};
}

FilterStepOutput ukf_step(const Gaussian& state, const Vector& y, const DynamicalModel& model,
                          const UTParams& params, int n) {
  check_observation(y, model);
  const auto f = [&model, n](const Vector& x) -> Vector { return model.transition(x, n); };
  UTResult pred = ut_transform(state, f, params, model.process_noise);
  const Gaussian predicted(std::move(pred.mean), std::move(pred.cov));
  const UTResult obs = ut_transform(predicted, model.measurement, params, model.obs_noise);
  GaussianUpdate upd =
      condition(predicted.mean(), predicted.cov(), obs.mean, obs.cov, obs.cross_cov, y);
  return single_gaussian_output(std::move(upd.posterior), upd.log_likelihood);
}

FilterStepOutput ekf_step(const Gaussian& state, const Vector& y, const DynamicalModel& model,
                          int n) {
  if (!model.has_jacobians()) throw std::invalid_argument("ekf_step: model has no Jacobians");
  check_observation(y, model);
  const Matrix f_jac = model.transition_jacobian(state.mean(), n);
  const Vector pred_mean = model.transition(state.mean(), n);
  const Matrix pred_cov =
      repair_covariance(f_jac * state.cov() * f_jac.transpose() + model.process_noise);

  const Matrix h_jac = model.measurement_jacobian(pred_mean);
  const Vector obs_mean = model.measurement(pred_mean);
  const Matrix obs_cov = h_jac * pred_cov * h_jac.transpose() + model.obs_noise;
  const Matrix cross = pred_cov * h_jac.transpose();
  GaussianUpdate upd = condition(pred_mean, pred_cov, obs_mean, obs_cov, cross, y);
  return single_gaussian_output(std::move(upd.posterior), upd.log_likelihood);
}

FilterStepOutput kf_step(const Gaussian& state, const Vector& y, const LinearGaussianModel& model) {
  const Vector pred_mean = model.A * state.mean() + model.b;
  const Matrix pred_cov = model.A * state.cov() * model.A.transpose() + model.Q;
  const Matrix obs_cov = model.H * pred_cov * model.H.transpose() + model.R;
  const Matrix cross = pred_cov * model.H.transpose();
  GaussianUpdate upd = condition(pred_mean, pred_cov, model.H * pred_mean, obs_cov, cross, y);
  return single_gaussian_output(std::move(upd.posterior), upd.log_likelihood);
}

namespace {

class MmfFilter final : public RecursiveFilter {
 public:
  MmfFilter(DynamicalModel model, MMFConfig cfg) : model_(std::move(model)), cfg_(std::move(cfg)) {
    model_.validate();
    cfg_.validate(model_.state_dim);
  }
  std::string name() const override { return "mmf"; }
  void reset(const Gaussian& prior) override { posterior_ = GaussianMixture(prior); }
  FilterStepOutput step(const Vector& y, int n) override {
    FilterStepOutput out = mmf_step(*posterior_, y, model_, cfg_, n);
    posterior_ = out.posterior;
    return out;
  }

 private:
  DynamicalModel model_;
  MMFConfig cfg_;
  std::optional<GaussianMixture> posterior_;
};

class UkfFilter final : public RecursiveFilter {
 public:
  UkfFilter(DynamicalModel model, UTParams params) : model_(std::move(model)), params_(params) {
    model_.validate();
    params_.validate(model_.state_dim);
  }
  std::string name() const override { return "ukf"; }
  void reset(const Gaussian& prior) override { state_ = prior; }
  FilterStepOutput step(const Vector& y, int n) override {
    FilterStepOutput out = ukf_step(*state_, y, model_, params_, n);
    state_ = out.posterior.component(0);
    return out;
  }

 private:
  DynamicalModel model_;
  UTParams params_;
  std::optional<Gaussian> state_;
};

class EkfFilter final : public RecursiveFilter {
 public:
  explicit EkfFilter(DynamicalModel model) : model_(std::move(model)) {
    model_.validate();
    if (!model_.has_jacobians()) throw std::invalid_argument("EKF requires analytic Jacobians");
  }
  std::string name() const override { return "ekf"; }
  void reset(const Gaussian& prior) override { state_ = prior; }
  FilterStepOutput step(const Vector& y, int n) override {
    FilterStepOutput out = ekf_step(*state_, y, model_, n);
    state_ = out.posterior.component(0);
    return out;
  }

 private:
  DynamicalModel model_;
  std::optional<Gaussian> state_;
};

class BootstrapParticleFilter final : public RecursiveFilter {
 public:
  BootstrapParticleFilter(DynamicalModel model, std::size_t particles, std::uint64_t seed)
      : model_(std::move(model)), count_(particles), seed_(seed) {
    model_.validate();
    if (count_ < 1) throw std::invalid_argument("particle filter needs at least one particle");
  }
  std::string name() const override { return "pf"; }
  void reset(const Gaussian& prior) override {
    rng_.seed(seed_);
    state_ = ParticleState::from_prior(prior, count_, rng_);
  }
  FilterStepOutput step(const Vector& y, int n) override {
    ParticleStepResult res = pf_step(*state_, y, model_, n, rng_);
    state_ = std::move(res.state);
    return std::move(res.output);
  }

 private:
  DynamicalModel model_;
  std::size_t count_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::optional<ParticleState> state_;
};

}  // namespace

std::unique_ptr<RecursiveFilter> make_mmf_filter(DynamicalModel model, MMFConfig cfg) {
  return std::make_unique<MmfFilter>(std::move(model), std::move(cfg));
}

std::unique_ptr<RecursiveFilter> make_ukf_filter(DynamicalModel model, UTParams params) {
  return std::make_unique<UkfFilter>(std::move(model), params);
}

std::unique_ptr<RecursiveFilter> make_ekf_filter(DynamicalModel model) {
  return std::make_unique<EkfFilter>(std::move(model));
}

std::unique_ptr<RecursiveFilter> make_particle_filter(DynamicalModel model, std::size_t particles,
                                                      std::uint64_t seed) {
  return std::make_unique<BootstrapParticleFilter>(std::move(model), particles, seed);
}

}  // namespace mmf
