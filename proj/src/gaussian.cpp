#include "mmf/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace mmf {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kEigenvalueFloor = -1e-10;
constexpr double kJitterScale = 1e-9;

bool all_finite(const Matrix& m) { return m.allFinite(); }

double min_eigenvalue(const Matrix& cov) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

// Cholesky that tolerates zero pivots. Returns the index of the first
// indefinite pivot, or -1 on success.
Eigen::Index semidefinite_cholesky(const Matrix& a, Matrix& lower) {
  const Eigen::Index n = a.rows();
  lower.setZero(n, n);
  const double scale = std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
  const double zero_tol = 1e-14 * scale;
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= lower(j, k) * lower(j, k);
    if (pivot < -zero_tol) return j;
    if (pivot <= zero_tol) {
      // Zero pivot: the remainder of the column has to vanish as well.
      for (Eigen::Index i = j + 1; i < n; ++i) {
        double r = a(i, j);
        for (Eigen::Index k = 0; k < j; ++k) r -= lower(i, k) * lower(j, k);
        if (std::abs(r) > std::sqrt(zero_tol) * std::sqrt(scale)) return j;
      }
      continue;
    }
    const double d = std::sqrt(pivot);
    lower(j, j) = d;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double r = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) r -= lower(i, k) * lower(j, k);
      lower(i, j) = r / d;
    }
  }
  return -1;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix jittered(const Matrix& cov) {
  const double jitter = kJitterScale * cov.trace() / static_cast<double>(cov.rows());
  Matrix out = cov;
  out.diagonal().array() += jitter;
  return out;
}

}  // namespace

Gaussian::Gaussian(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() == 0) throw InvariantError("Gaussian: empty mean");
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw InvariantError("Gaussian: covariance shape does not match mean dimension");
  }
  if (!mean_.allFinite() || !all_finite(cov_)) {
    throw InvariantError("Gaussian: non-finite mean or covariance");
  }
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
    throw InvariantError("Gaussian: covariance is not symmetric");
  }
  if (cov_.llt().info() != Eigen::Success && min_eigenvalue(cov_) < kEigenvalueFloor) {
    throw InvariantError("Gaussian: covariance is not positive semi-definite");
  }
}

Gaussian Gaussian::scalar(double mean, double variance) {
  return Gaussian(Vector::Constant(1, mean), Matrix::Constant(1, 1, variance));
}

GaussianMixture::GaussianMixture(std::vector<double> weights, std::vector<Gaussian> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  if (components_.empty()) throw InvariantError("GaussianMixture: no components");
  if (weights_.size() != components_.size()) {
    throw InvariantError("GaussianMixture: weight count does not match component count");
  }
  const auto d = components_.front().dim();
  double total = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (components_[i].dim() != d) throw InvariantError("GaussianMixture: mixed dimensions");
    const double w = weights_[i];
    if (!(w >= 0.0 && w <= 1.0 + kWeightSumTolerance)) {
      throw InvariantError("GaussianMixture: weight outside [0, 1]");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    std::ostringstream msg;
    msg << "GaussianMixture: weights sum to " << total;
    throw InvariantError(msg.str());
  }
}

GaussianMixture::GaussianMixture(Gaussian single)
    : weights_{1.0}, components_{std::move(single)} {}

double log_density(const Gaussian& g, const Vector& x) {
  if (x.size() != g.dim()) throw std::invalid_argument("log_density: dimension mismatch");
  Eigen::LLT<Matrix> llt(g.cov());
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("log_density: covariance is not positive definite");
  }
  const Matrix& l = llt.matrixLLT();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const Vector z = llt.matrixL().solve(x - g.mean());
  const double d = static_cast<double>(g.dim());
  return -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det + z.squaredNorm());
}

double log_sum_exp(const std::vector<double>& terms) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double t : terms) peak = std::max(peak, t);
  if (!std::isfinite(peak)) return peak;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - peak);
  return peak + std::log(acc);
}

double mixture_log_density(const GaussianMixture& m, const Vector& x) {
  std::vector<double> terms;
  terms.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.weight(i) <= 0.0) continue;
    // A singular component with positive weight has no density; let it throw.
    terms.push_back(std::log(m.weight(i)) + log_density(m.component(i), x));
  }
  return log_sum_exp(terms);
}

Moments mixture_moments(const GaussianMixture& m) {
  const auto d = m.dim();
  Vector mean = Vector::Zero(d);
  for (std::size_t i = 0; i < m.size(); ++i) mean += m.weight(i) * m.component(i).mean();
  Matrix cov = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Vector delta = m.component(i).mean() - mean;
    cov += m.weight(i) * (m.component(i).cov() + delta * delta.transpose());
  }
  return {std::move(mean), symmetrized(cov)};
}

Matrix cov_sqrt(const Matrix& cov) {
  if (cov.rows() != cov.cols()) throw std::invalid_argument("cov_sqrt: matrix is not square");
  Matrix lower;
  const Eigen::Index pivot = semidefinite_cholesky(cov, lower);
  if (pivot < 0) return lower;

  const double smallest = min_eigenvalue(symmetrized(cov));
  if (smallest >= kEigenvalueFloor && semidefinite_cholesky(jittered(cov), lower) < 0) {
    return lower;
  }
  std::ostringstream msg;
  msg << "cov_sqrt: matrix is indefinite at pivot " << pivot << " (smallest eigenvalue "
      << smallest << ")";
  throw FactorizationError(msg.str());
}

Matrix repair_covariance(const Matrix& cov) {
  Matrix sym = symmetrized(cov);
  Matrix lower;
  if (semidefinite_cholesky(sym, lower) < 0) return sym;
  const double smallest = min_eigenvalue(sym);
  if (smallest >= kEigenvalueFloor) {
    Matrix fixed = jittered(sym);
    if (semidefinite_cholesky(fixed, lower) < 0) return fixed;
  }
  std::ostringstream msg;
  msg << "repair_covariance: covariance is indefinite (smallest eigenvalue " << smallest << ")";
  throw FactorizationError(msg.str());
}

}  // namespace mmf
