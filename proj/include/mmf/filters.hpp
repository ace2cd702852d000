#pragma once

#include <memory>
#include <random>
#include <string>

#include "mmf/gaussian.hpp"
#include "mmf/gmm_ops.hpp"
#include "mmf/model.hpp"
#include "mmf/unscented.hpp"

namespace mmf {

/// Raised when a filter can no longer explain the observations, e.g. every
/// mixture likelihood underflows or every particle weight vanishes.
class FilterDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MMFConfig {
  std::size_t components = 3;
  UTParams ut;
  SplitParams split;
  ReductionConfig reduction;

  static MMFConfig with_components(std::size_t m);
  void validate(Eigen::Index state_dim) const;
};

struct FilterStepOutput {
  GaussianMixture posterior;
  /// ln p(y_n | y_1..y_{n-1}) at the received observation.
  double predictive_obs_log_density;
  Vector state_estimate;
};

struct MeasurementUpdate {
  GaussianMixture posterior;
  double predictive_obs_log_density;
};

// Multi-modal filter.

/// Propagates an M-component posterior through f(., n) with noise Q; the
/// result has M(2D+1) components.
GaussianMixture mmf_time_update(const GaussianMixture& posterior, const DynamicalModel& model,
                                const MMFConfig& cfg, int n);

/// Measurement update without the final reduction. Every predicted component
/// is split into 2D+1 sub-components, each pushed through h and conditioned on
/// y with its own gain, so K predicted components give K(2D+1) posterior
/// components.
MeasurementUpdate mmf_measurement_update_unreduced(const GaussianMixture& predicted,
                                                   const Vector& y, const DynamicalModel& model,
                                                   const MMFConfig& cfg);

/// mmf_measurement_update_unreduced followed by reduction to cfg.components.
MeasurementUpdate mmf_measurement_update(const GaussianMixture& predicted, const Vector& y,
                                         const DynamicalModel& model, const MMFConfig& cfg);

FilterStepOutput mmf_step(const GaussianMixture& posterior, const Vector& y,
                          const DynamicalModel& model, const MMFConfig& cfg, int n);

// Single-Gaussian baselines.

FilterStepOutput ukf_step(const Gaussian& state, const Vector& y, const DynamicalModel& model,
                          const UTParams& params, int n);

/// First-order EKF. Throws std::invalid_argument if the model has no Jacobians.
FilterStepOutput ekf_step(const Gaussian& state, const Vector& y, const DynamicalModel& model,
                          int n);

/// Exact Kalman recursion for a linear-Gaussian model.
FilterStepOutput kf_step(const Gaussian& state, const Vector& y, const LinearGaussianModel& model);

// Bootstrap particle filter.

/// Particles are stored as columns (D x N).
struct ParticleState {
  Matrix particles;
  Vector weights;

  static ParticleState from_prior(const Gaussian& prior, std::size_t count, std::mt19937_64& rng);
  std::size_t size() const { return static_cast<std::size_t>(particles.cols()); }
  double effective_sample_size() const;
};

struct ParticleStepResult {
  ParticleState state;
  FilterStepOutput output;
  /// Effective sample size of the updated weights, before any resampling.
  double effective_sample_size;
};

/// Residual resampling: floor(N w_i) deterministic copies of particle i, the
/// remaining slots drawn from the normalized residuals. Returns the ancestor
/// indices: deterministic copies first, in particle order, then the draws.
std::vector<std::size_t> residual_resample(const Vector& weights, std::size_t count,
                                           std::mt19937_64& rng);

/// Bootstrap step: propagate with f and Q-noise, weight by N(y | h(x), R),
/// resample (residual) when the effective sample size drops below N/2.
ParticleStepResult pf_step(const ParticleState& state, const Vector& y, const DynamicalModel& model,
                           int n, std::mt19937_64& rng);

/// Stateful wrapper giving every estimator the same reset/step interface.
class RecursiveFilter {
 public:
  virtual ~RecursiveFilter() = default;
  virtual std::string name() const = 0;
  virtual void reset(const Gaussian& prior) = 0;
  /// Processes observation y_n; n starts at 1.
  virtual FilterStepOutput step(const Vector& y, int n) = 0;
};

std::unique_ptr<RecursiveFilter> make_mmf_filter(DynamicalModel model, MMFConfig cfg);
std::unique_ptr<RecursiveFilter> make_ukf_filter(DynamicalModel model, UTParams params);
std::unique_ptr<RecursiveFilter> make_ekf_filter(DynamicalModel model);
std::unique_ptr<RecursiveFilter> make_particle_filter(DynamicalModel model, std::size_t particles,
                                                      std::uint64_t seed);

}  // namespace mmf
