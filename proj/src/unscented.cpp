#include "mmf/unscented.hpp"

#include <cmath>
#include <sstream>

namespace mmf {

double UTParams::lambda(Eigen::Index dim) const {
  const double d = static_cast<double>(dim);
  return alpha * alpha * (d + kappa) - d;
}

void UTParams::validate(Eigen::Index dim) const {
  if (!(alpha > 0.0)) throw InvariantError("UTParams: alpha must be positive");
  if (!(static_cast<double>(dim) + kappa > 0.0)) {
    throw InvariantError("UTParams: D + kappa must be positive");
  }
}

SigmaPointSet sigma_points(const Gaussian& g, const UTParams& params) {
  const Eigen::Index d = g.dim();
  params.validate(d);
  const double lambda = params.lambda(d);
  const double spread = static_cast<double>(d) + lambda;

  const Matrix root = cov_sqrt(spread * g.cov());

  SigmaPointSet set;
  set.points.resize(d, 2 * d + 1);
  set.points.col(0) = g.mean();
  for (Eigen::Index j = 0; j < d; ++j) {
    set.points.col(1 + j) = g.mean() + root.col(j);
    set.points.col(1 + d + j) = g.mean() - root.col(j);
  }
  set.mean_weights = Vector::Constant(2 * d + 1, 1.0 / (2.0 * spread));
  set.mean_weights(0) = lambda / spread;
  set.cov_weights = set.mean_weights;
  set.cov_weights(0) += 1.0 - params.alpha * params.alpha + params.beta;
  return set;
}

UTResult ut_transform(const Gaussian& g, const VectorFunction& fn, const UTParams& params,
                      const Matrix& additive_noise) {
  const SigmaPointSet set = sigma_points(g, params);
  const Eigen::Index n = set.count();

  Matrix outputs;
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector y = fn(set.points.col(i));
    if (i == 0) outputs.resize(y.size(), n);
    if (y.size() != outputs.rows()) {
      throw std::invalid_argument("ut_transform: function output dimension changed");
    }
    if (!y.allFinite()) {
      std::ostringstream msg;
      msg << "ut_transform: non-finite output at sigma point " << i;
      throw std::domain_error(msg.str());
    }
    outputs.col(i) = y;
  }
  const Eigen::Index e = outputs.rows();
  if (additive_noise.rows() != e || additive_noise.cols() != e) {
    throw std::invalid_argument("ut_transform: noise shape does not match output dimension");
  }

  Vector mean = Vector::Zero(e);
  for (Eigen::Index i = 0; i < n; ++i) mean += set.mean_weights(i) * outputs.col(i);

  Matrix cov = Matrix::Zero(e, e);
  Matrix cross = Matrix::Zero(g.dim(), e);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector dy = outputs.col(i) - mean;
    const Vector dx = set.points.col(i) - g.mean();
    cov += set.cov_weights(i) * dy * dy.transpose();
    cross += set.cov_weights(i) * dx * dy.transpose();
  }
  cov += additive_noise;
  return {std::move(mean), repair_covariance(cov), std::move(cross)};
}

}  // namespace mmf
