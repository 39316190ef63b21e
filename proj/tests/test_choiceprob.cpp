#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bqproc/choiceprob.hpp"
#include "bqproc/montecarlo.hpp"
#include "fixtures.hpp"

namespace {

using bqproc::CovariatePoint;
using bqproc::SampledFunction;
using bqproc::Vector;
using bqproc::testing::synthetic_path;

const CovariatePoint kUnitW{0.0, Vector::Ones(1)};

TEST(Psi, Examples) {
  const auto lin = SampledFunction::uniform(1001, [](double u) { return u - 0.5; });
  EXPECT_NEAR(bqproc::psi(lin, 0.0), 0.5, 1e-3);
  const auto one = SampledFunction::uniform(11, [](double) { return 1.0; });
  EXPECT_EQ(bqproc::psi(one, 0.0), 0.0);
  EXPECT_EQ(bqproc::psi(one, 1.0), 1.0);
}

TEST(Psi, MatchesQuadratureOfIndicator) {
  const auto g = SampledFunction::uniform(2001, [](double u) { return std::sin(6.0 * u); });
  // Oracle: exact sublevel set of sin(6u) <= 0.3 on [0,1] from its roots.
  const double r1 = std::asin(0.3) / 6.0;
  const double r2 = (M_PI - std::asin(0.3)) / 6.0;
  const double exact = r1 + (1.0 - r2);
  EXPECT_NEAR(bqproc::psi(g, 0.3), exact, 2.0 / 2001.0);
  const double quad = bqproc::numerics::integrate(
                          [](double u) { return std::sin(6.0 * u) <= 0.3 ? 1.0 : 0.0; }, 0.0, 1.0,
                          std::vector<double>{r1, r2}, 1e-6)
                          .value;
  EXPECT_NEAR(bqproc::psi(g, 0.3), quad, 2.0 / 2001.0);
}

TEST(Psi, NondecreasingInLevel) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  const auto g = SampledFunction::uniform(301, [&](double) { return nd(gen); });
  double prev = -1.0;
  for (double v = -4.0; v <= 4.0; v += 0.01) {
    const double cur = bqproc::psi(g, v);
    ASSERT_GE(cur, prev);
    prev = cur;
  }
}

TEST(Rearrangement, FixesMonotoneFunction) {
  const auto g = SampledFunction::uniform(1001, [](double u) { return u * u; });
  std::vector<double> q;
  for (int i = 1; i < 100; ++i) q.push_back(i / 100.0);
  const auto phi = bqproc::monotone_rearrangement(g, q);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double cell = 2e-3;
    EXPECT_GE(phi[i], std::pow(std::max(0.0, q[i] - cell), 2) - 1e-12);
    EXPECT_LE(phi[i], std::pow(q[i] + cell, 2) + 1e-12);
  }
}

TEST(Rearrangement, ReversesDecreasingFunction) {
  const auto g = SampledFunction::uniform(1001, [](double u) { return -u; });
  for (double u : {0.1, 0.33, 0.5, 0.91}) {
    EXPECT_NEAR(bqproc::monotone_rearrangement(g, {u})[0], u - 1.0, 2e-3);
  }
}

TEST(Rearrangement, MatchesSortOracle) {
  const std::size_t m = 2001;
  const auto g = SampledFunction::uniform(m, [](double u) { return (u - 0.3) * (u - 0.6) * (u - 0.9); });
  auto sorted = g.values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> q;
  for (int i = 1; i < 200; ++i) q.push_back(i / 200.0);
  const auto phi = bqproc::monotone_rearrangement(g, q);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const auto k = static_cast<std::ptrdiff_t>(std::ceil(q[i] * static_cast<double>(m))) - 1;
    const auto lo = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, k - 2));
    const auto hi = static_cast<std::size_t>(std::min<std::ptrdiff_t>(m - 1, k + 2));
    EXPECT_GE(phi[i], sorted[lo]);
    EXPECT_LE(phi[i], sorted[hi]);
    if (i > 0) EXPECT_GE(phi[i], phi[i - 1]);
  }
}

TEST(ChoiceProb, ConstantSignPaths) {
  const auto grid = bqproc::tau_grid(0.2, 0.8, 61);
  const auto pos = synthetic_path(grid, [](double) { return 0.4; });
  const auto neg = synthetic_path(grid, [](double) { return -0.4; });
  const auto ep = bqproc::choice_prob(pos, kUnitW, 0.25, 0.75);
  EXPECT_EQ(ep.p_hat, 0.75);
  EXPECT_EQ(ep.tau_w_hat, 0.25);
  EXPECT_EQ(ep.n_sign_changes, 0);
  const auto en = bqproc::choice_prob(neg, kUnitW, 0.25, 0.75);
  EXPECT_EQ(en.p_hat, 0.25);
  EXPECT_EQ(en.tau_w_hat, 0.75);
}

TEST(ChoiceProb, SingleCrossing) {
  const auto grid = bqproc::tau_grid(0.2, 0.8, 1001);
  const auto path = synthetic_path(grid, [](double t) { return t - 0.37; });
  const auto est = bqproc::choice_prob(path, kUnitW, 0.2, 0.8);
  EXPECT_NEAR(est.p_hat, 0.63, 1e-3);
  EXPECT_NEAR(est.tau_w_hat, 0.37, 1e-3);
  EXPECT_EQ(est.n_sign_changes, 1);
  EXPECT_NEAR(est.p_hat, 1.0 - est.tau_w_hat, 0.6 / 1000.0);
}

TEST(ChoiceProb, EndpointsOnlyMatterThroughCrossingRegion) {
  const auto grid = bqproc::tau_grid(0.25, 0.75, 201);
  const auto path = synthetic_path(grid, [](double t) { return t - 0.5 + 0.05 * std::sin(40.0 * t); });
  const auto wide = bqproc::choice_prob(path, kUnitW, 0.25, 0.75);
  const auto narrow = bqproc::choice_prob(path, kUnitW, 0.3, 0.7);
  // Negative on [0.25, 0.3] and positive on [0.7, 0.75], so both end
  // regions drop out and the estimates coincide bitwise.
  EXPECT_EQ(wide.p_hat, narrow.p_hat);
}

TEST(ChoiceProb, BoundsAndScaleInvariance) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> pos(0.1, 5.0);
  const auto grid = bqproc::tau_grid(0.2, 0.8, 121);
  const CovariatePoint w{0.7, Vector::Ones(1)};
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> g(grid.size());
    for (auto& v : g) v = nd(gen);
    bqproc::CoefficientPath path;
    bqproc::CoefficientPath scaled;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      bqproc::BetaEstimate est;
      est.s_hat = i % 2 ? 1 : -1;
      est.b_hat = Vector::Constant(1, g[i] - est.s_hat * w.z);
      path.push_back(grid[i], est);
      const double c = pos(gen);
      est.b_hat = Vector::Constant(1, c * g[i] - est.s_hat * w.z);
      scaled.push_back(grid[i], est);
    }
    const auto e1 = bqproc::choice_prob(path, w, 0.25, 0.75);
    const auto e2 = bqproc::choice_prob(scaled, w, 0.25, 0.75);
    EXPECT_EQ(e1.p_hat, e2.p_hat);
    EXPECT_EQ(e1.tau_w_hat, e2.tau_w_hat);
    EXPECT_GE(e1.p_hat, 0.25);
    EXPECT_LE(e1.p_hat, 0.75);
  }
}

TEST(ChoiceProb, RejectsUncoveredInterval) {
  const auto path = synthetic_path(bqproc::tau_grid(0.3, 0.7, 41), [](double t) { return t - 0.5; });
  EXPECT_THROW(bqproc::choice_prob(path, kUnitW, 0.25, 0.75), bqproc::DomainError);
  EXPECT_THROW(bqproc::choice_prob(path, kUnitW, 0.6, 0.4), bqproc::DomainError);
  EXPECT_THROW(bqproc::choice_prob(path, {0.0, Vector::Ones(2)}, 0.3, 0.7), bqproc::DomainError);
}

TEST(ChoiceProbSe, OracleScalesWithRootNh) {
  const auto dgp = bqproc::reference_dgp();
  auto path = synthetic_path(bqproc::tau_grid(0.25, 0.75, 11), [](double) { return 0.0; });
  for (auto& b : path.b_hat) b = Vector{{0.25, 1.0}};
  path.h = 0.2;
  path.n = 4000;
  bqproc::ChoiceProbEstimate est;
  est.w = {-0.75, Vector{{1.0, 0.5}}};
  const double se1 = bqproc::choice_prob_se(path, est, dgp, bqproc::KernelSpec::gauss2());
  path.n *= 2;
  const double se2 = bqproc::choice_prob_se(path, est, dgp, bqproc::KernelSpec::gauss2());
  EXPECT_NEAR(se1 / se2, std::sqrt(2.0), 1e-12);
  // Closed form at tau_w = 0.5: |w'Delta| = 4 + 2 * 0.5.
  const bqproc::Matrix V = bqproc::sandwich_covariance(dgp, 0.5, bqproc::KernelSpec::gauss2());
  EXPECT_NEAR(se1, std::sqrt(est.w.x.dot(V * est.w.x) / (4000 * 0.2)) / 5.0, 1e-14);
}

TEST(ChoiceProbSe, FlatPathIsIllConditioned) {
  auto path = synthetic_path(bqproc::tau_grid(0.25, 0.75, 51), [](double) { return 0.0; });
  path.h = 0.3;
  const auto est = bqproc::choice_prob(path, kUnitW, 0.25, 0.75);
  auto data = bqproc::testing::scalar_fixture(100, 2);
  EXPECT_THROW(bqproc::choice_prob_se(path, est, data, bqproc::KernelSpec::gauss2()),
               bqproc::IllConditionedCrossing);
}

TEST(ChoiceProbSe, DataModeNearOracle) {
  const auto dgp = bqproc::reference_dgp();
  const auto data = bqproc::simulate(dgp, 6000, 17);
  const double h = bqproc::default_bandwidth(6000, 2).h;
  const auto path = bqproc::estimate_process(data, bqproc::tau_grid(0.25, 0.75, 101), h,
                                             bqproc::KernelSpec::gauss2(), {});
  const CovariatePoint w{-0.75, Vector{{1.0, 0.5}}};
  const auto est = bqproc::choice_prob(path, w, 0.25, 0.75);
  const double se_o = bqproc::choice_prob_se(path, est, dgp, bqproc::KernelSpec::gauss2());
  const double se_d = bqproc::choice_prob_se(path, est, data, bqproc::KernelSpec::gauss2());
  EXPECT_GT(se_d, 0.0);
  EXPECT_LT(std::abs(std::log(se_d / se_o)), std::log(3.0));
}

TEST(Linearization, ExactLinearCase) {
  const auto r = bqproc::linearization_bound_check([](double u) { return u - 0.5; },
                                                   [](double u) { return u - 0.5 + 0.001; }, 0.5, 0.01,
                                                   0.3, 0.7);
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.lhs, 0.0, 1e-12);
  EXPECT_NEAR(r.xi, 0.0, 1e-12);
  EXPECT_LT(r.c_h, 1e-4);
}

TEST(Linearization, CosineFamily) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  for (int i = 0; i < 100; ++i) {
    const double ph = phase(gen);
    const auto r = bqproc::linearization_bound_check(
        [](double u) { return u - 0.5; }, [ph](double u) { return u - 0.5 + 0.002 * std::cos(40.0 * u + ph); },
        0.5, 0.01, 0.3, 0.7, 1.0, [](double) { return 1.0; });
    EXPECT_TRUE(r.pass) << i << " lhs " << r.lhs << " rhs " << r.rhs;
  }
}

TEST(Linearization, QuadraticConstant) {
  const auto g = [](double u) { return 2.0 * (u - 0.5) + 0.3 * (u - 0.5) * (u - 0.5); };
  const auto r = bqproc::linearization_bound_check(g, [&](double u) { return g(u) + 0.001 * std::sin(7 * u); },
                                                   0.5, 0.01, 0.3, 0.7, 1.0, [](double) { return 2.0; });
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.c_h, 0.3, 1e-9);
}

TEST(Linearization, RandomizedFamiliesPass) {
  for (int i = 0; i < 60; ++i) {
    const auto p = bqproc::testing::linearization_pair(7, i);
    const auto r = bqproc::linearization_bound_check(p.g, p.h, p.u0, p.eps, p.a, p.b, 1.0, p.g_prime);
    EXPECT_TRUE(r.pass) << p.family << " " << i;
  }
}

TEST(Linearization, PreconditionReported) {
  EXPECT_THROW(bqproc::linearization_bound_check([](double u) { return u - 0.5; },
                                                 [](double u) { return u - 0.4; }, 0.5, 0.01, 0.3, 0.7),
               bqproc::PreconditionNotMet);
  EXPECT_THROW(bqproc::linearization_bound_check([](double u) { return u - 0.4; },
                                                 [](double u) { return u - 0.4; }, 0.5, 0.01, 0.3, 0.7),
               bqproc::PreconditionNotMet);
  EXPECT_THROW(bqproc::linearization_bound_check([](double u) { return u - 0.5; },
                                                 [](double u) { return u - 0.5; }, 0.5, 0.3, 0.3, 0.7),
               bqproc::PreconditionNotMet);
}

TEST(Linearization, SublevelMeasureOfSine) {
  const double m = bqproc::detail::sublevel_measure([](double u) { return std::sin(6.0 * u) - 0.3; }, 0.0, 1.0);
  const double r1 = std::asin(0.3) / 6.0;
  const double r2 = (M_PI - std::asin(0.3)) / 6.0;
  EXPECT_NEAR(m, r1 + 1.0 - r2, 1e-14);
}

}  // namespace
