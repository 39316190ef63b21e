#pragma once

#include <algorithm>
#include <limits>

#include "bqproc/dgp.hpp"
#include "bqproc/score.hpp"

namespace bqproc::testing {

/// Reference-design draw with the slope column dropped (x = 1 only).
inline Dataset scalar_fixture(Eigen::Index n, std::uint64_t seed) {
  Dataset data = simulate(reference_dgp(), n, seed);
  data.x = data.x.leftCols(1).eval();
  return data;
}

/// max over s = +-1 and b on a uniform grid of step `step` in [-r, r].
inline double grid_oracle(const Dataset& data, double tau, double h, const KernelSpec& kernel,
                          double r, double step) {
  double best = -std::numeric_limits<double>::infinity();
  const long m = static_cast<long>(std::llround(2.0 * r / step));
  for (int s : {1, -1}) {
    for (long i = 0; i <= m; ++i) {
      const ScorePoint p{s, Vector::Constant(1, -r + step * static_cast<double>(i)), tau, h};
      best = std::max(best, smoothed_score(data, p, kernel));
    }
  }
  return best;
}

}  // namespace bqproc::testing

#include <functional>
#include <random>
#include <string>

#include "bqproc/estimator.hpp"

namespace bqproc::testing {

/// Path over `taus` with d = 1, s = +1 and b_tau = f(tau); for w = (0, 1)
/// the index w'beta_tau equals f(tau).
template <class F>
CoefficientPath synthetic_path(const std::vector<double>& taus, F&& f) {
  CoefficientPath path;
  for (double t : taus) {
    BetaEstimate est;
    est.s_hat = 1;
    est.b_hat = Vector::Constant(1, f(t));
    est.diagnostics.converged = true;
    path.push_back(t, est);
  }
  return path;
}

struct LinearizationPair {
  std::string family;
  std::function<double(double)> g;
  std::function<double(double)> g_prime;
  std::function<double(double)> h;
  double u0 = 0.5;
  double eps = 0.01;
  double a = 0.3;
  double b = 0.7;
};

/// Pair `i` of a deterministic randomized sequence cycling through linear,
/// quadratic and oscillatory perturbations. Amplitudes are sized so the
/// lemma's precondition holds at eps = 0.01.
inline LinearizationPair linearization_pair(std::uint64_t seed, int i) {
  std::mt19937_64 gen(seed * 1000003u + static_cast<std::uint64_t>(i));
  auto unif = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); };
  LinearizationPair p;
  p.u0 = unif(0.4, 0.6);
  p.a = p.u0 - 0.2;
  p.b = p.u0 + 0.2;
  const double c = (unif(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * unif(0.5, 3.0);
  const double u0 = p.u0;
  const double shift = unif(-0.002, 0.002);
  switch (i % 3) {
    case 0: {
      p.family = "linear";
      const double tilt = unif(-0.1, 0.1);
      p.g = [=](double u) { return c * (u - u0); };
      p.g_prime = [=](double) { return c; };
      p.h = [=](double u) { return c * (u - u0) + shift + tilt * (u - u0); };
      break;
    }
    case 1: {
      p.family = "quadratic";
      const double q = unif(-0.5, 0.5);
      const double amp = unif(-5e-4, 5e-4);
      const double omega = unif(5.0, 20.0);
      const double phase = unif(0.0, 6.283185307179586);
      p.g = [=](double u) { return c * (u - u0) + q * (u - u0) * (u - u0); };
      p.g_prime = [=](double) { return c; };
      p.h = [=](double u) {
        return c * (u - u0) + q * (u - u0) * (u - u0) + shift + amp * std::sin(omega * u + phase);
      };
      break;
    }
    default: {
      p.family = "oscillatory";
      const double q = unif(0.0, 1.0) < 0.5 ? 0.0 : unif(-0.3, 0.3);
      const double amp = unif(-0.002, 0.002);
      const double phase = unif(0.0, 6.283185307179586);
      p.g = [=](double u) { return c * (u - u0) + q * (u - u0) * (u - u0); };
      p.g_prime = [=](double) { return c; };
      p.h = [=](double u) {
        return c * (u - u0) + q * (u - u0) * (u - u0) + shift + amp * std::cos(40.0 * u + phase);
      };
      break;
    }
  }
  return p;
}

}  // namespace bqproc::testing
