#include "mmf/gmm_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mmf {

double SplitParams::component_scale(Eigen::Index dim) const {
  return 1.0 - 2.0 * alpha / (2.0 * static_cast<double>(dim) + 1.0);
}

void SplitParams::validate(Eigen::Index dim) const {
  if (!(alpha > 0.0)) throw InvariantError("SplitParams: split_alpha must be positive");
  if (2.0 * alpha > 2.0 * static_cast<double>(dim) + 1.0) {
    std::ostringstream msg;
    msg << "SplitParams: split_alpha " << alpha << " violates 2*alpha <= 2D+1 for D = " << dim;
    throw InvariantError(msg.str());
  }
}

GaussianMixture split_gaussian(const Gaussian& g, const SplitParams& sp) {
  const Eigen::Index d = g.dim();
  sp.validate(d);
  const Matrix offsets = cov_sqrt(sp.alpha * g.cov());
  // Clamp the exact sigma-point limit, where rounding can leave -0 or -1e-17.
  const double scale = std::max(0.0, sp.component_scale(d));
  const Matrix component_cov = scale * g.cov();
  const auto count = static_cast<std::size_t>(2 * d + 1);

  std::vector<Gaussian> components;
  components.reserve(count);
  components.emplace_back(g.mean(), component_cov);
  for (Eigen::Index j = 0; j < d; ++j) components.emplace_back(g.mean() + offsets.col(j), component_cov);
  for (Eigen::Index j = 0; j < d; ++j) components.emplace_back(g.mean() - offsets.col(j), component_cov);
  return GaussianMixture(std::vector<double>(count, 1.0 / static_cast<double>(count)),
                         std::move(components));
}

GaussianMixture split_mixture(const GaussianMixture& m, const SplitParams& sp) {
  std::vector<double> weights;
  std::vector<Gaussian> components;
  const auto per_parent = static_cast<std::size_t>(2 * m.dim() + 1);
  weights.reserve(m.size() * per_parent);
  components.reserve(m.size() * per_parent);
  for (std::size_t j = 0; j < m.size(); ++j) {
    GaussianMixture parts = split_gaussian(m.component(j), sp);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      weights.push_back(m.weight(j) * parts.weight(i));
      components.push_back(parts.component(i));
    }
  }
  return GaussianMixture(std::move(weights), std::move(components));
}

GaussianMixture propagate_mixture(const GaussianMixture& m, const VectorFunction& fn,
                                  const Matrix& noise, const UTParams& ut, const SplitParams& sp) {
  const GaussianMixture split = split_mixture(m, sp);
  std::vector<Gaussian> components;
  components.reserve(split.size());
  for (const Gaussian& part : split.components()) {
    UTResult pushed = ut_transform(part, fn, ut, noise);
    components.emplace_back(std::move(pushed.mean), std::move(pushed.cov));
  }
  return GaussianMixture(split.weights(), std::move(components));
}

double sym_kl(const Gaussian& a, const Gaussian& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("sym_kl: dimension mismatch");
  Eigen::LLT<Matrix> llt_a(a.cov());
  Eigen::LLT<Matrix> llt_b(b.cov());
  if (llt_a.info() != Eigen::Success || llt_b.info() != Eigen::Success) {
    throw FactorizationError("sym_kl: covariance is not positive definite");
  }
  const Vector delta = b.mean() - a.mean();
  // The log-determinant terms cancel in the symmetrized sum.
  const double traces = llt_b.solve(a.cov()).trace() + llt_a.solve(b.cov()).trace();
  const double quad = delta.dot(llt_a.solve(delta)) + delta.dot(llt_b.solve(delta));
  const double d = static_cast<double>(a.dim());
  return std::max(0.0, 0.25 * (traces + quad) - 0.5 * d);
}

WeightedGaussian merge_pair(double w1, const Gaussian& a, double w2, const Gaussian& b) {
  if (!(w1 > 0.0) || !(w2 > 0.0)) throw std::invalid_argument("merge_pair: weights must be positive");
  if (a.dim() != b.dim()) throw std::invalid_argument("merge_pair: dimension mismatch");
  const double w = w1 + w2;
  const double f1 = w1 / w;
  const double f2 = w2 / w;
  Vector mean = f1 * a.mean() + f2 * b.mean();
  const Vector d1 = a.mean() - mean;
  const Vector d2 = b.mean() - mean;
  Matrix cov = f1 * (a.cov() + d1 * d1.transpose()) + f2 * (b.cov() + d2 * d2.transpose());
  return {w, Gaussian(std::move(mean), std::move(cov))};
}

GaussianMixture reduce_mixture(const GaussianMixture& m, const ReductionConfig& rc) {
  if (rc.target_components < 1) throw InvariantError("ReductionConfig: target_components must be >= 1");
  if (m.size() <= rc.target_components) return m;

  std::vector<double> weights = m.weights();
  std::vector<Gaussian> parts = m.components();

  // Zero-weight components cannot be merged by the weighted formula; they
  // carry no mass, so they are dropped before distances are considered.
  for (std::size_t i = parts.size(); i-- > 0 && parts.size() > rc.target_components;) {
    if (weights[i] <= 0.0) {
      weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(i));
      parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }

  std::size_t n = parts.size();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) dist[i][j] = sym_kl(parts[i], parts[j]);
  }

  while (n > rc.target_components) {
    std::size_t best_i = 0;
    std::size_t best_j = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (dist[i][j] < best) {
          best = dist[i][j];
          best_i = i;
          best_j = j;
        }
      }
    }

    WeightedGaussian merged = merge_pair(weights[best_i], parts[best_i], weights[best_j], parts[best_j]);
    weights[best_i] = merged.weight;
    parts[best_i] = std::move(merged.gaussian);
    const auto jj = static_cast<std::ptrdiff_t>(best_j);
    weights.erase(weights.begin() + jj);
    parts.erase(parts.begin() + jj);
    dist.erase(dist.begin() + jj);
    for (auto& row : dist) row.erase(row.begin() + jj);
    --n;

    for (std::size_t k = 0; k < n; ++k) {
      if (k == best_i) continue;
      const double d = sym_kl(parts[std::min(k, best_i)], parts[std::max(k, best_i)]);
      dist[std::min(k, best_i)][std::max(k, best_i)] = d;
    }
  }

  double total = 0.0;
  for (double w : weights) total += w;
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    for (double& w : weights) w /= total;
  }
  return GaussianMixture(std::move(weights), std::move(parts));
}

}  // namespace mmf
