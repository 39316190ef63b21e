#pragma once

// Location-scale binary response designs with closed-form quantile paths:
//   Y* = Z + X'gamma + (1 + lambda X_1) eps,   Y = I{Y* >= 0},
// X = (1, X_1, ..., X_{d-1}) with independent uniform components and
// Z ~ Uniform(z_lo, z_hi) independent of X. The z-coefficient of the
// quantile path is +1, so s0 = +1 and b_bar_tau needs no rescaling.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include "bqproc/dataset.hpp"
#include "bqproc/error.hpp"
#include "bqproc/kernels.hpp"
#include "bqproc/numerics.hpp"
#include "bqproc/rng.hpp"

namespace bqproc {

enum class ErrorDist { logistic, normal };

inline std::string to_string(ErrorDist e) { return e == ErrorDist::logistic ? "logistic" : "normal"; }

inline ErrorDist parse_error_dist(const std::string& s) {
  if (s == "logistic") return ErrorDist::logistic;
  if (s == "normal") return ErrorDist::normal;
  throw ConfigError("unknown error distribution '" + s + "' (expected logistic or normal)");
}

inline double error_cdf(ErrorDist e, double v) {
  if (e == ErrorDist::normal) return numerics::normal_cdf(v);
  return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
}

inline double error_pdf(ErrorDist e, double v) {
  if (e == ErrorDist::normal) return numerics::normal_pdf(v);
  const double a = std::exp(-std::abs(v));
  return a / ((1.0 + a) * (1.0 + a));
}

inline double error_quantile(ErrorDist e, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("error quantile level must lie in (0,1)");
  if (e == ErrorDist::normal) return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
  return std::log(p / (1.0 - p));
}

/// A point w = (z, x) in covariate space.
struct CovariatePoint {
  double z = 0.0;
  Vector x;
};

struct DGPSpec {
  std::string name = "custom";
  Vector gamma;                                      // length d, entry 0 multiplies the constant
  double lambda = 0.0;                               // loading of the scale on x_1
  ErrorDist error = ErrorDist::logistic;
  std::vector<std::pair<double, double>> x_intervals;  // uniform ranges of x_1 .. x_{d-1}
  double z_lo = -4.0;
  double z_hi = 4.0;

  Eigen::Index d() const { return gamma.size(); }

  double scale(const Vector& x) const { return d() >= 2 ? 1.0 + lambda * x[1] : 1.0; }

  void validate() const {
    if (gamma.size() < 1) throw ConfigError("dgp: gamma must have at least the intercept entry");
    if (static_cast<Eigen::Index>(x_intervals.size()) + 1 != gamma.size()) {
      throw ConfigError("dgp: need one x interval per non-constant covariate (" +
                        std::to_string(gamma.size() - 1) + ")");
    }
    if (!gamma.allFinite() || !std::isfinite(lambda)) throw ConfigError("dgp: non-finite parameter");
    if (lambda < 0.0) throw ConfigError("dgp: lambda must be >= 0");
    for (const auto& [lo, hi] : x_intervals) {
      if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw ConfigError("dgp: x intervals need lo < hi");
      }
    }
    if (d() == 1 && lambda != 0.0) throw ConfigError("dgp: lambda requires a non-constant covariate");
    if (d() >= 2) {
      const auto [lo, hi] = x_intervals.front();
      if (!(1.0 + lambda * lo > 0.0 && 1.0 + lambda * hi > 0.0)) {
        throw ConfigError("dgp: scale 1 + lambda x_1 must be positive on the x support");
      }
    }
    if (!(z_lo <= z_hi) || !std::isfinite(z_lo) || !std::isfinite(z_hi)) {
      throw ConfigError("dgp: need z_lo <= z_hi");
    }
  }

  bool has_z_density() const { return z_hi > z_lo; }

  double z_density(double z) const {
    if (!has_z_density()) throw DomainError("dgp: degenerate z law has no density");
    return (z > z_lo && z < z_hi) ? 1.0 / (z_hi - z_lo) : 0.0;
  }

  /// F_{Y*|X,Z}(0 | x, z).
  double conditional_cdf_at_zero(const Vector& x, double z) const {
    return error_cdf(error, -(z + x.dot(gamma)) / scale(x));
  }
};

/// gamma = (0.25, 1), lambda = 0.5, logistic errors, X_1 ~ U(0,1), Z ~ U(-4,4).
inline DGPSpec reference_dgp() {
  DGPSpec s;
  s.name = "ref";
  s.gamma = Vector{{0.25, 1.0}};
  s.lambda = 0.5;
  s.error = ErrorDist::logistic;
  s.x_intervals = {{0.0, 1.0}};
  s.z_lo = -4.0;
  s.z_hi = 4.0;
  return s;
}

/// Draws n records; observation i of replication `replication` depends only
/// on (seed, replication, i).
inline Dataset simulate(const DGPSpec& dgp, Eigen::Index n, std::uint64_t seed,
                        std::uint64_t replication = 0) {
  dgp.validate();
  if (n < 1) throw ConfigError("simulate: n must be >= 1");
  if (n > std::numeric_limits<std::uint32_t>::max()) throw ConfigError("simulate: n too large");
  const Eigen::Index d = dgp.d();
  const CounterRng rng(seed, replication);
  Dataset data;
  data.y.resize(n);
  data.z.resize(n);
  data.x.resize(n, d);
  Vector xi(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::uint32_t>(i);
    const auto [uz, ue] = rng.uniform_pair(idx, 0);
    xi[0] = 1.0;
    for (Eigen::Index j = 1; j < d; ++j) {
      const auto [lo, hi] = dgp.x_intervals[static_cast<std::size_t>(j - 1)];
      xi[j] = lo + (hi - lo) * rng.uniform(idx, static_cast<std::uint32_t>(j + 1));
    }
    const double z = dgp.z_lo + (dgp.z_hi - dgp.z_lo) * uz;
    const double eps = error_quantile(dgp.error, ue);
    data.z[i] = z;
    data.x.row(i) = xi.transpose();
    data.y[i] = (z + xi.dot(dgp.gamma) + dgp.scale(xi) * eps >= 0.0) ? 1.0 : 0.0;
  }
  data.provenance = "simulate:" + dgp.name + ":seed=" + std::to_string(seed) +
                    ":rep=" + std::to_string(replication) + ":n=" + std::to_string(n);
  return data;
}

struct TrueBeta {
  int s0 = 1;
  Vector b_bar;
};

inline TrueBeta true_beta(const DGPSpec& dgp, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("true_beta: tau must lie in (0,1)");
  const double q = error_quantile(dgp.error, tau);
  TrueBeta tb;
  tb.b_bar = dgp.gamma;
  tb.b_bar[0] += q;
  if (dgp.d() >= 2) tb.b_bar[1] += dgp.lambda * q;
  return tb;
}

/// P(Y = 1 | W = w).
inline double true_choice_prob(const DGPSpec& dgp, const CovariatePoint& w) {
  if (w.x.size() != dgp.d()) throw DomainError("true_choice_prob: covariate dimension mismatch");
  const double sc = dgp.scale(w.x);
  if (!(sc > 0.0)) throw DomainError("true_choice_prob: non-positive scale at w");
  return 1.0 - error_cdf(dgp.error, -(w.z + w.x.dot(dgp.gamma)) / sc);
}

/// Level tau_w with w'beta_{tau_w} = 0.
inline double true_tau_w(const DGPSpec& dgp, const CovariatePoint& w) {
  if (w.x.size() != dgp.d()) throw DomainError("true_tau_w: covariate dimension mismatch");
  const double sc = dgp.scale(w.x);
  if (!(sc > 0.0)) throw DomainError("true_tau_w: non-positive scale at w");
  const double t = error_cdf(dgp.error, -(w.z + w.x.dot(dgp.gamma)) / sc);
  constexpr double kEdge = 1e-10;
  if (!(t > kEdge && t < 1.0 - kEdge)) {
    throw NoCrossing("w'beta_tau keeps one sign over (0,1)");
  }
  return t;
}

namespace detail {

inline numerics::TensorRule x_rule(const DGPSpec& dgp) {
  return numerics::gauss_legendre_box(dgp.x_intervals);
}

/// Full covariate vector (1, x_1, ...) from a quadrature point and its
/// probability weight under the uniform product law.
inline std::pair<Vector, double> x_node(const DGPSpec& dgp, const numerics::TensorRule& rule,
                                        std::size_t k) {
  Vector x(dgp.d());
  x[0] = 1.0;
  double vol = 1.0;
  for (Eigen::Index j = 1; j < dgp.d(); ++j) {
    x[j] = rule.points[k][static_cast<std::size_t>(j - 1)];
    const auto [lo, hi] = dgp.x_intervals[static_cast<std::size_t>(j - 1)];
    vol *= hi - lo;
  }
  return {x, rule.weights[k] / vol};
}

/// Requires the crossing z0 = -s x'b to stay strictly inside the z support
/// over the whole x box (z0 is affine in x, so corners suffice).
inline void require_interior_crossing(const DGPSpec& dgp, int s, const Vector& b) {
  if (!dgp.has_z_density()) throw DomainError("dgp: degenerate z law has no density");
  const Eigen::Index m = dgp.d() - 1;
  for (std::uint64_t mask = 0; mask < (1ull << m); ++mask) {
    Vector x(dgp.d());
    x[0] = 1.0;
    for (Eigen::Index j = 1; j <= m; ++j) {
      const auto [lo, hi] = dgp.x_intervals[static_cast<std::size_t>(j - 1)];
      x[j] = (mask >> (j - 1)) & 1ull ? hi : lo;
    }
    const double z0 = -s * x.dot(b);
    if (!(z0 > dgp.z_lo && z0 < dgp.z_hi)) {
      throw DomainError("dgp: crossing point z = " + std::to_string(z0) +
                        " is not interior to the z support");
    }
  }
}

/// G(u) = (tau - F_{Y*|X,Z}(0 | x, z(u))) f_Z(z(u)),  z(u) = s(-x'b + u).
inline double score_density(const DGPSpec& dgp, int s, const Vector& b, double tau, const Vector& x,
                            double u) {
  const double z = s * (-x.dot(b) + u);
  return (tau - dgp.conditional_cdf_at_zero(x, z)) * dgp.z_density(z);
}

}  // namespace detail

/// Hessian of b -> S_tau((s, b)) at (s, b): -int dG/du(0) x x' dP_X, with
/// the u-derivative in closed form (the uniform z density is flat inside).
inline Matrix population_Q_at(const DGPSpec& dgp, int s, const Vector& b, [[maybe_unused]] double tau) {
  dgp.validate();
  detail::require_interior_crossing(dgp, s, b);
  const auto rule = detail::x_rule(dgp);
  Matrix Q = Matrix::Zero(dgp.d(), dgp.d());
  for (std::size_t k = 0; k < rule.weights.size(); ++k) {
    const auto [x, wt] = detail::x_node(dgp, rule, k);
    const double sc = dgp.scale(x);
    const double z0 = -s * x.dot(b);
    const double dG = s * error_pdf(dgp.error, -(z0 + x.dot(dgp.gamma)) / sc) / sc *
                      dgp.z_density(z0);
    Q.noalias() -= wt * dG * x * x.transpose();
  }
  return 0.5 * (Q + Q.transpose());
}

inline Matrix population_Q(const DGPSpec& dgp, double tau) {
  const auto tb = true_beta(dgp, tau);
  return population_Q_at(dgp, tb.s0, tb.b_bar, tau);
}

/// k-th derivative at u = 0 of u -> G(u) by a central difference (step
/// 1e-2) refined with one Richardson step; refuses unstable derivatives.
inline double score_density_derivative(const DGPSpec& dgp, int s, const Vector& b, double tau,
                                       const Vector& x, int k) {
  auto central = [&](double delta) {
    double acc = 0.0;
    for (int j = 0; j <= k; ++j) {
      const double c = boost::math::binomial_coefficient<double>(static_cast<unsigned>(k),
                                                                 static_cast<unsigned>(j));
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      acc += sign * c * detail::score_density(dgp, s, b, tau, x, (0.5 * k - j) * delta);
    }
    return acc / std::pow(delta, k);
  };
  constexpr double kStep = 1e-2;
  auto richardson = [&](double delta) { return (4.0 * central(0.5 * delta) - central(delta)) / 3.0; };
  const double coarse = richardson(kStep);
  const double fine = richardson(0.5 * kStep);
  if (!(std::abs(coarse - fine) <= 1e-4 * std::max(1.0, std::abs(fine)))) {
    throw NumericError("population_bias: Richardson estimates of g_" + std::to_string(k) +
                       " disagree (" + std::to_string(coarse) + " vs " + std::to_string(fine) + ")");
  }
  return fine;
}

/// Deterministic smoothing bias of the score gradient at (s0, b_bar_tau):
/// h^k / k! * int v^k K * int g_k(x) x dP_X.
inline Vector population_bias(const DGPSpec& dgp, double tau, const KernelSpec& kernel, double h) {
  if (!(h > 0.0)) throw DomainError("population_bias: h must be positive");
  dgp.validate();
  const auto tb = true_beta(dgp, tau);
  detail::require_interior_crossing(dgp, tb.s0, tb.b_bar);
  const int k = kernel.order();
  const auto rule = detail::x_rule(dgp);
  Vector acc = Vector::Zero(dgp.d());
  for (std::size_t q = 0; q < rule.weights.size(); ++q) {
    const auto [x, wt] = detail::x_node(dgp, rule, q);
    acc += wt * score_density_derivative(dgp, tb.s0, tb.b_bar, tau, x, k) * x;
  }
  return std::pow(h, k) / std::tgamma(k + 1.0) * kernel.kth_moment() * acc;
}

/// Leading bias of b_hat implied by the linearization Q (b_hat - b_bar) = -T_n:
/// -Q^{-1} T_n.
inline Vector coefficient_bias(const DGPSpec& dgp, double tau, const KernelSpec& kernel, double h) {
  const Matrix Q = population_Q(dgp, tau);
  return -Q.ldlt().solve(population_bias(dgp, tau, kernel, h));
}

/// d beta_bar_tau / d tau as a (d+1)-vector ordered (z, x_0, x_1, ...).
inline Vector population_delta(const DGPSpec& dgp, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("population_delta: tau must lie in (0,1)");
  const double qprime = 1.0 / error_pdf(dgp.error, error_quantile(dgp.error, tau));
  Vector delta = Vector::Zero(dgp.d() + 1);
  delta[1] = qprime;
  if (dgp.d() >= 2) delta[2] = dgp.lambda * qprime;
  return delta;
}

}  // namespace bqproc
