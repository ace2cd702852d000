#pragma once

#include <functional>

#include "mmf/gaussian.hpp"

namespace mmf {

/// Scaled unscented transform parameters. lambda = alpha^2 (D + kappa) - D.
struct UTParams {
  double alpha = 1.0;
  double beta = 2.0;
  double kappa = 2.0;

  double lambda(Eigen::Index dim) const;
  /// Throws InvariantError unless alpha > 0 and D + lambda > 0.
  void validate(Eigen::Index dim) const;
};

/// 2D+1 sigma points stored as columns, with mean and covariance weights.
struct SigmaPointSet {
  Matrix points;
  Vector mean_weights;
  Vector cov_weights;

  Eigen::Index count() const { return points.cols(); }
};

using VectorFunction = std::function<Vector(const Vector&)>;

struct UTResult {
  Vector mean;
  Matrix cov;
  /// Cross-covariance between the input and the transformed variable (D x E).
  Matrix cross_cov;
};

SigmaPointSet sigma_points(const Gaussian& g, const UTParams& params);

/// Pushes g through fn with the unscented transform; additive_noise is added
/// to the output covariance afterwards. Throws std::domain_error if fn yields a
/// non-finite value at some sigma point.
UTResult ut_transform(const Gaussian& g, const VectorFunction& fn, const UTParams& params,
                      const Matrix& additive_noise);

}  // namespace mmf
