#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mmf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a covariance cannot be factorized (indefinite or singular).
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a value type is constructed in violation of its invariants.
class InvariantError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One multivariate normal N(mean, cov). The covariance may be singular
/// (zero-covariance components are legal data) but density evaluation
/// requires it to be positive definite.
class Gaussian {
 public:
  Gaussian(Vector mean, Matrix cov);

  static Gaussian scalar(double mean, double variance);

  const Vector& mean() const { return mean_; }
  const Matrix& cov() const { return cov_; }
  Eigen::Index dim() const { return mean_.size(); }

 private:
  Vector mean_;
  Matrix cov_;
};

/// Weighted sum of Gaussians. Weights lie in [0, 1] and sum to one.
class GaussianMixture {
 public:
  GaussianMixture(std::vector<double> weights, std::vector<Gaussian> components);
  explicit GaussianMixture(Gaussian single);

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Gaussian>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }
  Eigen::Index dim() const { return components_.front().dim(); }

  double weight(std::size_t i) const { return weights_[i]; }
  const Gaussian& component(std::size_t i) const { return components_[i]; }

 private:
  std::vector<double> weights_;
  std::vector<Gaussian> components_;
};

struct Moments {
  Vector mean;
  Matrix cov;
};

inline constexpr double kWeightSumTolerance = 1e-12;

double log_density(const Gaussian& g, const Vector& x);

/// Log-sum-exp of ln w_i + log_density(g_i, x). Zero-weight terms are skipped.
double mixture_log_density(const GaussianMixture& m, const Vector& x);

Moments mixture_moments(const GaussianMixture& m);

/// Lower-triangular L with L L^T = cov. Semi-definite input is accepted
/// (zero pivots yield zero columns). On failure the near-PSD repair is tried
/// once: if the smallest eigenvalue is >= -1e-10 a diagonal jitter of
/// 1e-9 * trace / D is added. Anything else throws FactorizationError.
Matrix cov_sqrt(const Matrix& cov);

/// Symmetrizes cov and applies the near-PSD repair when it does not factor.
Matrix repair_covariance(const Matrix& cov);

/// Log-sum-exp of a list of log terms; -inf for an empty or all -inf input.
double log_sum_exp(const std::vector<double>& terms);

}  // namespace mmf
