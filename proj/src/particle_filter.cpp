#include <cmath>
#include <limits>
#include <numbers>

#include "mmf/filters.hpp"

namespace mmf {

namespace {

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) z(r, c) = normal(rng);
  }
  return z;
}

}  // namespace

ParticleState ParticleState::from_prior(const Gaussian& prior, std::size_t count,
                                        std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(count);
  ParticleState state;
  state.particles = (cov_sqrt(prior.cov()) * standard_normal(prior.dim(), n, rng)).colwise() +
                    prior.mean();
  state.weights = Vector::Constant(n, 1.0 / static_cast<double>(count));
  return state;
}

double ParticleState::effective_sample_size() const { return 1.0 / weights.squaredNorm(); }

std::vector<std::size_t> residual_resample(const Vector& weights, std::size_t count,
                                           std::mt19937_64& rng) {
  const double n = static_cast<double>(count);
  std::vector<std::size_t> ancestors;
  ancestors.reserve(count);
  std::vector<double> residuals(static_cast<std::size_t>(weights.size()));
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const double expected = n * weights(i);
    const double copies = std::floor(expected);
    for (double c = 0; c < copies && ancestors.size() < count; ++c) {
      ancestors.push_back(static_cast<std::size_t>(i));
    }
    residuals[static_cast<std::size_t>(i)] = expected - copies;
  }
  if (ancestors.size() < count) {
    std::discrete_distribution<std::size_t> draw(residuals.begin(), residuals.end());
    while (ancestors.size() < count) ancestors.push_back(draw(rng));
  }
  return ancestors;
}

ParticleStepResult pf_step(const ParticleState& state, const Vector& y, const DynamicalModel& model,
                           int n, std::mt19937_64& rng) {
  if (y.size() != model.obs_dim) throw std::invalid_argument("pf_step: observation dimension mismatch");
  const Eigen::Index count = state.particles.cols();
  const Eigen::Index d = state.particles.rows();

  const Matrix noise_root = cov_sqrt(model.process_noise);
  const Matrix noise = noise_root * standard_normal(d, count, rng);
  Matrix moved(d, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    moved.col(i) = model.transition(state.particles.col(i), n) + noise.col(i);
  }

  Eigen::LLT<Matrix> obs_llt(model.obs_noise);
  if (obs_llt.info() != Eigen::Success) {
    throw FactorizationError("pf_step: observation noise is not positive definite");
  }
  const double e = static_cast<double>(model.obs_dim);
  const double log_norm = -0.5 * (e * std::log(2.0 * std::numbers::pi) +
                                  2.0 * obs_llt.matrixLLT().diagonal().array().log().sum());

  std::vector<double> log_terms(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    const Vector z = obs_llt.matrixL().solve(y - model.measurement(moved.col(i)));
    log_terms[static_cast<std::size_t>(i)] = std::log(state.weights(i)) + log_norm - 0.5 * z.squaredNorm();
  }
  const double log_evidence = log_sum_exp(log_terms);
  if (!std::isfinite(log_evidence)) throw FilterDivergence("particle degeneracy");

  Vector weights(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    weights(i) = std::exp(log_terms[static_cast<std::size_t>(i)] - log_evidence);
  }
  weights /= weights.sum();

  const Vector mean = moved * weights;
  const Matrix centered = moved.colwise() - mean;
  const Matrix cov = centered * weights.asDiagonal() * centered.transpose();

  ParticleState next{std::move(moved), std::move(weights)};
  const double ess = next.effective_sample_size();
  if (ess < 0.5 * static_cast<double>(count)) {
    const auto ancestors = residual_resample(next.weights, static_cast<std::size_t>(count), rng);
    Matrix resampled(d, count);
    for (Eigen::Index i = 0; i < count; ++i) {
      resampled.col(i) = next.particles.col(static_cast<Eigen::Index>(ancestors[static_cast<std::size_t>(i)]));
    }
    next.particles = std::move(resampled);
    next.weights = Vector::Constant(count, 1.0 / static_cast<double>(count));
  }

  Gaussian summary(mean, repair_covariance(cov));
  FilterStepOutput out{GaussianMixture(std::move(summary)), log_evidence, mean};
  return {std::move(next), std::move(out), ess};
}

}  // namespace mmf
