#include "mmf/unscented.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace mmf {
namespace {

Matrix random_psd(Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  return a * a.transpose() + 0.05 * Matrix::Identity(d, d);
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix a(r, c);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  return a;
}

double rel_err(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

const UTParams kDefault{1.0, 2.0, 2.0};

TEST(SigmaPoints, ScalarDefaults) {
  const SigmaPointSet s = sigma_points(Gaussian::scalar(0, 1), kDefault);
  ASSERT_EQ(s.count(), 3);
  EXPECT_DOUBLE_EQ(s.points(0, 0), 0.0);
  EXPECT_NEAR(s.points(0, 1), std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(s.points(0, 2), -std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(s.mean_weights(0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.mean_weights(1), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(s.mean_weights(2), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(s.cov_weights(0), 8.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.cov_weights(1), 1.0 / 6.0, 1e-15);
}

TEST(SigmaPoints, ZeroLambdaHasZeroCentreWeight) {
  const SigmaPointSet s = sigma_points(Gaussian::scalar(2.0, 4.0), UTParams{1.0, 2.0, 0.0});
  EXPECT_DOUBLE_EQ(s.mean_weights(0), 0.0);
  EXPECT_DOUBLE_EQ(s.points(0, 1), 4.0);
  EXPECT_DOUBLE_EQ(s.points(0, 2), 0.0);
}

TEST(SigmaPoints, DegenerateCovarianceCollapses) {
  const Vector mu = Vector::LinSpaced(3, -1.0, 1.0);
  const SigmaPointSet s = sigma_points(Gaussian(mu, Matrix::Zero(3, 3)), kDefault);
  for (Eigen::Index i = 0; i < s.count(); ++i) EXPECT_EQ(s.points.col(i), mu);
}

TEST(SigmaPoints, ReconstructsMomentsForRandomCovariances) {
  std::mt19937_64 rng(23);
  for (Eigen::Index d = 1; d <= 5; ++d) {
    for (const UTParams& p : {kDefault, UTParams{0.5, 2.0, 0.0}, UTParams{1.3, 0.0, 1.0}}) {
      const Gaussian g(random_matrix(d, 1, rng), random_psd(d, rng));
      const SigmaPointSet s = sigma_points(g, p);
      EXPECT_NEAR(s.mean_weights.sum(), 1.0, 1e-12);
      const Vector mean = s.points * s.mean_weights;
      EXPECT_LE((mean - g.mean()).cwiseAbs().maxCoeff(), 1e-12);
      const Matrix centred = s.points.colwise() - g.mean();
      const Matrix scatter = centred * s.cov_weights.asDiagonal() * centred.transpose();
      EXPECT_LE(rel_err(scatter, g.cov()), 1e-10);
    }
  }
}

TEST(SigmaPoints, RejectsNonPositiveSpread) {
  EXPECT_THROW(sigma_points(Gaussian::scalar(0, 1), UTParams{1.0, 2.0, -1.0}), InvariantError);
  EXPECT_THROW(sigma_points(Gaussian::scalar(0, 1), UTParams{0.0, 2.0, 2.0}), InvariantError);
}

TEST(UtTransform, AffineScalar) {
  const auto fn = [](const Vector& x) -> Vector { return 2.0 * x + Vector::Ones(1); };
  const UTResult r = ut_transform(Gaussian::scalar(1, 1), fn, kDefault, Matrix::Zero(1, 1));
  EXPECT_NEAR(r.mean(0), 3.0, 1e-12);
  EXPECT_NEAR(r.cov(0, 0), 4.0, 1e-12);
  EXPECT_NEAR(r.cross_cov(0, 0), 2.0, 1e-12);
}

TEST(UtTransform, IdentityAddsNoise) {
  std::mt19937_64 rng(2);
  const Gaussian g(random_matrix(3, 1, rng), random_psd(3, rng));
  const Matrix q = random_psd(3, rng);
  const UTResult r = ut_transform(g, [](const Vector& x) -> Vector { return x; }, kDefault, q);
  EXPECT_LE(rel_err(r.mean, g.mean()), 1e-12);
  EXPECT_LE(rel_err(r.cov, g.cov() + q), 1e-12);
  EXPECT_LE(rel_err(r.cross_cov, g.cov()), 1e-12);
}

TEST(UtTransform, AffineExactnessRandom) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index d = 1 + trial % 4;
    const Eigen::Index e = 1 + (trial / 4) % 3;
    const Matrix a = random_matrix(e, d, rng);
    const Vector b = random_matrix(e, 1, rng);
    const Gaussian g(random_matrix(d, 1, rng), random_psd(d, rng));
    const Matrix noise = random_psd(e, rng);
    const UTResult r =
        ut_transform(g, [&](const Vector& x) -> Vector { return a * x + b; }, kDefault, noise);
    EXPECT_LE(rel_err(r.mean, a * g.mean() + b), 1e-9);
    EXPECT_LE(rel_err(r.cov, a * g.cov() * a.transpose() + noise), 1e-9);
    EXPECT_LE(rel_err(r.cross_cov, g.cov() * a.transpose()), 1e-9);
  }
}

TEST(UtTransform, OutputCovarianceIsSymmetricPsd) {
  std::mt19937_64 rng(8);
  const auto fn = [](const Vector& x) -> Vector {
    Vector y(2);
    y << std::sin(x(0)) * x(1), x.squaredNorm();
    return y;
  };
  for (const UTParams& p : {kDefault, UTParams{0.3, 2.0, 0.0}}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Gaussian g(random_matrix(2, 1, rng), random_psd(2, rng));
      const UTResult r = ut_transform(g, fn, p, Matrix::Zero(2, 2));
      EXPECT_EQ(r.cov, r.cov.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> eig(r.cov);
      EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
    }
  }
}

TEST(UtTransform, SineGolden) {
  // Points 0, +-sqrt(3) with weights 2/3, 1/6, 1/6 (covariance 8/3, 1/6, 1/6):
  // mean 0, variance (25/3) sin^2(sqrt 3).
  const auto fn = [](const Vector& x) -> Vector { return 5.0 * x.array().sin().matrix(); };
  const UTResult r = ut_transform(Gaussian::scalar(0, 1), fn, kDefault, Matrix::Zero(1, 1));
  const double golden = 25.0 / 3.0 * std::pow(std::sin(std::sqrt(3.0)), 2);
  EXPECT_NEAR(r.mean(0), 0.0, 1e-14);
  EXPECT_NEAR(r.cov(0, 0), golden, 1e-12);
  EXPECT_NEAR(r.cov(0, 0), 8.118513, 1e-6);

  // Exact moment E[25 sin^2 x] = 12.5 (1 - e^-2); the UT only approximates it.
  const double exact = 12.5 * (1.0 - std::exp(-2.0));
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  double acc = 0.0;
  const int samples = 400000;
  for (int i = 0; i < samples; ++i) acc += 25.0 * std::pow(std::sin(normal(rng)), 2);
  EXPECT_NEAR(acc / samples, exact, 0.05);
  EXPECT_GT(r.cov(0, 0), 0.0);
  EXPECT_LT(std::abs(std::log10(r.cov(0, 0) / exact)), 1.0);
}

TEST(UtTransform, NonFiniteOutputNamesSigmaPoint) {
  const auto fn = [](const Vector& x) -> Vector {
    return x(0) > 1.0 ? Vector::Constant(1, NAN) : x;
  };
  try {
    ut_transform(Gaussian::scalar(0, 1), fn, kDefault, Matrix::Zero(1, 1));
    FAIL() << "expected std::domain_error";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("sigma point 1"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace mmf
