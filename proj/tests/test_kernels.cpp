#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "bqproc/kernels.hpp"
#include "bqproc/numerics.hpp"

namespace {

using bqproc::KernelSpec;

TEST(Kernels, AntiderivativeIsHalfAtZero) {
  EXPECT_DOUBLE_EQ(bqproc::builtin_kernel("gauss2").Kc(0.0), 0.5);
  EXPECT_DOUBLE_EQ(bqproc::builtin_kernel("gauss4").Kc(0.0), 0.5);
}

TEST(Kernels, UnknownNameIsConfigError) {
  EXPECT_THROW(bqproc::builtin_kernel("epanechnikov"), bqproc::ConfigError);
}

TEST(Kernels, Gauss4HasVanishingSecondMoment) {
  const auto k = bqproc::builtin_kernel("gauss4");
  const auto r = bqproc::numerics::integrate([&](double v) { return v * v * k.K(v); }, -10, 10);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
  // Closed form of the fourth moment: (3 E v^4 - E v^6) / 2 = (9 - 15) / 2.
  EXPECT_DOUBLE_EQ(k.kth_moment(), -3.0);
  EXPECT_EQ(k.order(), 4);
}

TEST(Kernels, SquaredIntegralsMatchQuadrature) {
  for (const char* name : {"gauss2", "gauss4"}) {
    const auto k = bqproc::builtin_kernel(name);
    const auto r = bqproc::numerics::integrate([&](double v) { return k.K(v) * k.K(v); }, -10, 10);
    EXPECT_NEAR(k.squared_integral(), r.value, 1e-12) << name;
  }
  EXPECT_NEAR(bqproc::builtin_kernel("gauss2").squared_integral(), 1.0 / (2.0 * std::sqrt(std::numbers::pi)), 1e-15);
}

TEST(ValidateMoments, BuiltinsPass) {
  const auto r2 = bqproc::validate_moments(bqproc::builtin_kernel("gauss2"), 1e-8);
  EXPECT_TRUE(r2.pass);
  EXPECT_NEAR(r2.integral, 1.0, 1e-12);
  ASSERT_EQ(r2.moments.size(), 1u);
  EXPECT_NEAR(r2.moments[0], 0.0, 1e-12);
  const auto r4 = bqproc::validate_moments(bqproc::builtin_kernel("gauss4"), 1e-8);
  EXPECT_TRUE(r4.pass);
  ASSERT_EQ(r4.moments.size(), 3u);
  EXPECT_NEAR(r4.moments[1], 0.0, 1e-12);
  EXPECT_NEAR(r4.moments[2], 0.0, 1e-12);
  EXPECT_EQ(r4.tail_decay.size(), 4u);
}

TEST(ValidateMoments, CorruptedKernelFailsOnMass) {
  bqproc::CustomKernel fns;
  fns.K_fn = [](double v) { return bqproc::numerics::normal_pdf(v) + (std::abs(v) <= 1.0 ? 0.01 : 0.0); };
  fns.Kc_fn = [](double u) {
    return bqproc::numerics::normal_cdf(u) + 0.01 * std::clamp(u + 1.0, 0.0, 2.0);
  };
  fns.Kprime_fn = [](double v) { return -v * bqproc::numerics::normal_pdf(v); };
  const auto k = KernelSpec::custom("corrupt", 2, 1.0, fns, {-1.0, 1.0});
  const auto r = bqproc::validate_moments(k, 1e-8);
  EXPECT_FALSE(r.pass);
  // Direct quadrature oracle: the bump adds 0.02 of mass.
  EXPECT_NEAR(r.integral, 1.02, 1e-10);
  EXPECT_FALSE(r.failures.empty());
}

TEST(ValidateMoments, RejectsNonPositiveTolerance) {
  EXPECT_THROW(bqproc::validate_moments(bqproc::builtin_kernel("gauss2"), 0.0), bqproc::ConfigError);
}

TEST(Antiderivative, ConsistentWithQuadrature) {
  const std::vector<double> grid{-2, -1, 0, 1, 2};
  EXPECT_LE(bqproc::antiderivative_consistency(bqproc::builtin_kernel("gauss2"), grid), 1e-8);
  EXPECT_LE(bqproc::antiderivative_consistency(bqproc::builtin_kernel("gauss4"), grid), 1e-8);
  for (const char* name : {"gauss2", "gauss4"}) {
    const auto k = bqproc::builtin_kernel(name);
    EXPECT_LE(std::abs(k.Kc(-10.0 * k.support_hint())), 1e-6);
    EXPECT_LE(std::abs(k.Kc(10.0 * k.support_hint()) - 1.0), 1e-6);
  }
}

TEST(Kernels, DerivativeMatchesFiniteDifference) {
  for (const char* name : {"gauss2", "gauss4"}) {
    const auto k = bqproc::builtin_kernel(name);
    double gap = 0.0;
    for (int i = 0; i <= 120000; ++i) {
      const double u = -6.0 + 1e-4 * i;
      const double fd = (k.K(u + 1e-5) - k.K(u - 1e-5)) / 2e-5;
      gap = std::max(gap, std::abs(fd - k.Kprime(u)));
    }
    EXPECT_LE(gap, 1e-6) << name;
  }
}

TEST(Kernels, AntiderivativeIsSymmetric) {
  for (const char* name : {"gauss2", "gauss4"}) {
    const auto k = bqproc::builtin_kernel(name);
    for (double u = -8.0; u <= 8.0; u += 0.01) {
      ASSERT_NEAR(k.Kc(u) + k.Kc(-u), 1.0, 1e-10) << name << " u=" << u;
    }
  }
}

TEST(Kernels, FusedEvaluationMatchesSeparateCalls) {
  const auto k = bqproc::builtin_kernel("gauss4");
  k.visit([&](const auto& impl) {
    for (double u : {-3.2, -0.5, 0.0, 0.7, 2.9}) {
      const auto kv = impl.eval(u);
      EXPECT_DOUBLE_EQ(kv.K, k.K(u));
      EXPECT_DOUBLE_EQ(kv.Kc, k.Kc(u));
      EXPECT_DOUBLE_EQ(kv.Kprime, k.Kprime(u));
    }
  });
}

TEST(Kernels, Gauss2IsMonotoneGauss4IsNot) {
  const auto k2 = bqproc::builtin_kernel("gauss2");
  const auto k4 = bqproc::builtin_kernel("gauss4");
  double prev = 0.0;
  bool k4_dips = false;
  for (double u = -8.0; u <= 8.0; u += 0.01) {
    ASSERT_GE(k2.Kc(u), prev);
    prev = k2.Kc(u);
    if (k4.K(u) < 0.0) k4_dips = true;
  }
  EXPECT_TRUE(k4_dips);
}

}  // namespace
