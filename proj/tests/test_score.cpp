#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bqproc/dgp.hpp"
#include "bqproc/score.hpp"

namespace {

using bqproc::Dataset;
using bqproc::KernelSpec;
using bqproc::Matrix;
using bqproc::ScorePoint;
using bqproc::Vector;

Dataset make(std::initializer_list<double> y, std::initializer_list<double> z,
             std::initializer_list<double> x) {
  Dataset d;
  d.y = Vector(static_cast<Eigen::Index>(y.size()));
  d.z = Vector(static_cast<Eigen::Index>(z.size()));
  d.x = bqproc::RowMatrix(static_cast<Eigen::Index>(x.size()), 1);
  Eigen::Index i = 0;
  for (double v : y) d.y[i++] = v;
  i = 0;
  for (double v : z) d.z[i++] = v;
  i = 0;
  for (double v : x) d.x(i++, 0) = v;
  return d;
}

Dataset random_fixture(std::mt19937_64& gen, Eigen::Index n, Eigen::Index d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  Dataset data;
  data.y.resize(n);
  data.z.resize(n);
  data.x.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.y[i] = coin(gen) ? 1.0 : 0.0;
    data.z[i] = 3.0 * u(gen);
    data.x(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < d; ++j) data.x(i, j) = u(gen);
  }
  return data;
}

TEST(RawScore, Examples) {
  ScorePoint p{1, Vector::Zero(1), 0.5, 1.0};
  EXPECT_DOUBLE_EQ(bqproc::raw_score(make({1}, {1}, {1}), p), 0.5);
  EXPECT_DOUBLE_EQ(bqproc::raw_score(make({1, 0}, {1, -1}, {1, 1}), p), 0.25);
}

TEST(RawScore, TiesCountAsActive) {
  ScorePoint p{1, Vector::Zero(1), 0.5, 1.0};
  EXPECT_DOUBLE_EQ(bqproc::raw_score(make({1}, {0}, {1}), p), 0.5);
}

TEST(RawScore, MatchesNaiveSum) {
  const auto data = bqproc::simulate(bqproc::reference_dgp(), 50, 31);
  Dataset one = data;
  one.x = data.x.leftCols(1);
  const ScorePoint p{1, Vector{{0.7}}, 0.3, 1.0};
  double naive = 0.0;
  for (Eigen::Index i = 0; i < one.n(); ++i) {
    if (0.7 * one.x(i, 0) + one.z[i] >= 0.0) naive += one.y[i] - 0.7;
  }
  EXPECT_NEAR(bqproc::raw_score(one, p), naive / 50.0, 1e-12);
}

TEST(SmoothedScore, HalfWeightAtHyperplane) {
  const ScorePoint p{1, Vector::Zero(1), 0.5, 0.3};
  EXPECT_DOUBLE_EQ(bqproc::smoothed_score(make({1}, {0}, {1}), p, KernelSpec::gauss2()), 0.25);
}

TEST(SmoothedScore, TendsToRawScore) {
  const auto data = bqproc::simulate(bqproc::reference_dgp(), 200, 4);
  ScorePoint p{1, Vector{{0.1, 0.9}}, 0.4, 1e-8};
  for (auto k : {KernelSpec::gauss2(), KernelSpec::gauss4()}) {
    EXPECT_NEAR(bqproc::smoothed_score(data, p, k), bqproc::raw_score(data, p), 1e-12);
  }
}

TEST(SmoothedScore, MatchesNaiveSum) {
  const auto data = bqproc::simulate(bqproc::reference_dgp(), 120, 9);
  const ScorePoint p{-1, Vector{{0.3, -0.4}}, 0.65, 0.7};
  const auto k = KernelSpec::gauss4();
  double naive = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double u = (data.x.row(i).dot(p.b) - data.z[i]) / p.h;
    naive += (data.y[i] - 0.35) * (std::erfc(-u / std::sqrt(2.0)) / 2.0 +
                                   0.5 * u * std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI));
  }
  EXPECT_NEAR(bqproc::smoothed_score(data, p, k), naive / 120.0, 1e-13);
}

TEST(ScoreGradient, SymmetricTwoPointDesignIsZero) {
  const ScorePoint p{1, Vector::Zero(1), 0.5, 0.5};
  const Vector g = bqproc::score_gradient(make({1, 0}, {1, 1}, {1, 1}), p, KernelSpec::gauss2());
  EXPECT_DOUBLE_EQ(g[0], 0.0);
}

TEST(ScoreDerivatives, MatchFiniteDifferences) {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int f = 0; f < 10; ++f) {
    const Eigen::Index d = 1 + f % 3;
    const auto data = random_fixture(gen, 150, d);
    Vector b(d);
    for (Eigen::Index j = 0; j < d; ++j) b[j] = u(gen);
    const ScorePoint p{f % 2 ? 1 : -1, b, 0.2 + 0.06 * f, 0.4};
    for (const auto& k : {KernelSpec::gauss2(), KernelSpec::gauss4()}) {
      const auto full = bqproc::evaluate_score(data, p, k, bqproc::ScoreOrder::hessian);
      const double e = 1e-6;
      for (Eigen::Index j = 0; j < d; ++j) {
        ScorePoint hi = p, lo = p;
        hi.b[j] += e;
        lo.b[j] -= e;
        const double fd = (bqproc::smoothed_score(data, hi, k) - bqproc::smoothed_score(data, lo, k)) / (2 * e);
        EXPECT_NEAR(full.gradient[j], fd, 1e-6);
        const Vector fdg = (bqproc::score_gradient(data, hi, k) - bqproc::score_gradient(data, lo, k)) / (2 * e);
        for (Eigen::Index i = 0; i < d; ++i) EXPECT_NEAR(full.hessian(i, j), fdg[i], 1e-5);
      }
      EXPECT_EQ((full.hessian - full.hessian.transpose()).cwiseAbs().maxCoeff(), 0.0);
      EXPECT_DOUBLE_EQ(full.value, bqproc::smoothed_score(data, p, k));
    }
  }
}

TEST(SmoothedScore, JointScaleInvariance) {
  const auto data = bqproc::simulate(bqproc::reference_dgp(), 300, 12);
  const ScorePoint p{1, Vector{{0.2, 1.1}}, 0.45, 0.3};
  const double c = 2.5;
  Dataset scaled = data;
  scaled.z *= c;
  const ScorePoint q{1, c * p.b, p.tau, c * p.h};
  const auto k = KernelSpec::gauss2();
  EXPECT_NEAR(bqproc::smoothed_score(data, p, k), bqproc::smoothed_score(scaled, q, k), 1e-14);
  EXPECT_EQ(bqproc::raw_score(data, p), bqproc::raw_score(scaled, q));
}

TEST(ScorePoint, Validation) {
  const auto data = make({1}, {1}, {1});
  const auto k = KernelSpec::gauss2();
  EXPECT_THROW(bqproc::smoothed_score(data, {0, Vector::Zero(1), 0.5, 1.0}, k), bqproc::DomainError);
  EXPECT_THROW(bqproc::smoothed_score(data, {1, Vector::Zero(2), 0.5, 1.0}, k), bqproc::DomainError);
  EXPECT_THROW(bqproc::smoothed_score(data, {1, Vector::Zero(1), 1.0, 1.0}, k), bqproc::DomainError);
  EXPECT_THROW(bqproc::smoothed_score(data, {1, Vector::Zero(1), 0.5, 0.0}, k), bqproc::DomainError);
  EXPECT_NO_THROW(bqproc::raw_score(data, {1, Vector::Zero(1), 0.5, 0.0}));
}

TEST(AsymptoticVariance, ScalarUniformDesign) {
  bqproc::DGPSpec dgp;
  dgp.gamma = Vector{{0.25}};
  dgp.z_lo = -3.0;
  dgp.z_hi = 3.0;
  const auto k = KernelSpec::gauss2();
  const Matrix S = bqproc::asymptotic_variance(dgp, 0.5, k);
  EXPECT_NEAR(S(0, 0), 0.25 * (1.0 / (2.0 * std::sqrt(M_PI))) / 6.0, 1e-15);
  const Matrix S3 = bqproc::asymptotic_variance(dgp, 0.3, k);
  const Matrix S7 = bqproc::asymptotic_variance(dgp, 0.7, k);
  EXPECT_NEAR(S3(0, 0) / S7(0, 0), 1.0, 1e-14);
}

TEST(AsymptoticVariance, ReferenceDesignIsPositiveDefinite) {
  const auto dgp = bqproc::reference_dgp();
  const Matrix V = bqproc::sandwich_covariance(dgp, 0.5, KernelSpec::gauss2());
  Eigen::SelfAdjointEigenSolver<Matrix> es(V);
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  // x x' weighted by f_Z = 1/8 with E x_1 = 1/2, E x_1^2 = 1/3.
  const Matrix S = bqproc::asymptotic_variance(dgp, 0.5, KernelSpec::gauss2());
  const double c = 0.25 * (1.0 / (2.0 * std::sqrt(M_PI))) / 8.0;
  EXPECT_NEAR(S(0, 0), c, 1e-15);
  EXPECT_NEAR(S(0, 1), c / 2.0, 1e-15);
  EXPECT_NEAR(S(1, 1), c / 3.0, 1e-15);
}

}  // namespace
