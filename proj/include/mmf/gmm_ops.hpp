#pragma once

#include "mmf/gaussian.hpp"
#include "mmf/unscented.hpp"

namespace mmf {

/// Scaling of the split offsets sqrt(split_alpha * Sigma). Each split
/// component keeps covariance (1 - 2 split_alpha / (2D+1)) Sigma, so the
/// split is proper only while 2 split_alpha <= 2D + 1.
struct SplitParams {
  double alpha = 1.0;

  double component_scale(Eigen::Index dim) const;
  void validate(Eigen::Index dim) const;
};

enum class ReductionMetric { symmetric_kl };

struct ReductionConfig {
  std::size_t target_components = 3;
  ReductionMetric metric = ReductionMetric::symmetric_kl;
};

struct WeightedGaussian {
  double weight;
  Gaussian gaussian;
};

/// Replaces g by 2D+1 equally weighted Gaussians centred at mu and
/// mu +/- columns of chol(split_alpha * Sigma). First two moments match g.
GaussianMixture split_gaussian(const Gaussian& g, const SplitParams& sp);

/// Splits every component; sub-component weights are parent weight / (2D+1).
GaussianMixture split_mixture(const GaussianMixture& m, const SplitParams& sp);

/// Splits m and pushes every sub-component through fn with the unscented
/// transform, adding noise to each output covariance. M components in,
/// M(2D+1) out.
GaussianMixture propagate_mixture(const GaussianMixture& m, const VectorFunction& fn,
                                  const Matrix& noise, const UTParams& ut, const SplitParams& sp);

/// Symmetrized Kullback-Leibler divergence (KL(a|b) + KL(b|a)) / 2.
double sym_kl(const Gaussian& a, const Gaussian& b);

/// Moment-preserving merge of two weighted Gaussians.
WeightedGaussian merge_pair(double w1, const Gaussian& a, double w2, const Gaussian& b);

/// Greedily merges the closest pair (smallest sym_kl, ties broken by the
/// lexicographically smallest index pair) until target_components remain.
GaussianMixture reduce_mixture(const GaussianMixture& m, const ReductionConfig& rc);

}  // namespace mmf
