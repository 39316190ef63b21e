#pragma once

// Choice probabilities from an estimated quantile path and the
// rearrangement maps behind them:
//   p_hat(a, b)  = 1 - b + int_a^b I{w'beta_tau >= 0} dtau
//   Psi_g(v)     = |{u in [0,1] : g(u) <= v}|,   Phi_g = generalized inverse of Psi_g.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <Eigen/Dense>

#include "bqproc/dataset.hpp"
#include "bqproc/dgp.hpp"
#include "bqproc/error.hpp"
#include "bqproc/estimator.hpp"
#include "bqproc/kernels.hpp"
#include "bqproc/numerics.hpp"
#include "bqproc/score.hpp"

namespace bqproc {

/// Samples of g on a strictly increasing grid in [0,1].
struct SampledFunction {
  std::vector<double> grid;
  std::vector<double> values;

  void validate() const {
    if (grid.empty() || grid.size() != values.size()) {
      throw DomainError("sampled function: grid and values must be non-empty and of equal length");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) throw DomainError("sampled function: grid outside [0,1]");
      if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("sampled function: grid not increasing");
      if (!std::isfinite(values[i])) throw DomainError("sampled function: non-finite value");
    }
  }

  template <class F>
  static SampledFunction uniform(std::size_t points, F&& f) {
    SampledFunction s;
    s.grid.resize(points);
    s.values.resize(points);
    for (std::size_t i = 0; i < points; ++i) {
      s.grid[i] = points == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(points - 1);
      s.values[i] = f(s.grid[i]);
    }
    return s;
  }
};

namespace detail {

/// Midpoint cell of grid point i, clipped to [lo, hi]; outer cells extend to
/// the clip bounds.
inline std::pair<double, double> midpoint_cell(const std::vector<double>& grid, std::size_t i,
                                               double lo, double hi) {
  const double left = i == 0 ? lo : 0.5 * (grid[i - 1] + grid[i]);
  const double right = i + 1 == grid.size() ? hi : 0.5 * (grid[i] + grid[i + 1]);
  return {std::max(left, lo), std::min(right, hi)};
}

}  // namespace detail

/// Lebesgue measure of {g <= v} under midpoint-rule cell weights.
inline double psi(const SampledFunction& g, double v) {
  g.validate();
  std::vector<double> terms;
  for (std::size_t i = 0; i < g.grid.size(); ++i) {
    if (g.values[i] <= v) {
      const auto [lo, hi] = detail::midpoint_cell(g.grid, i, 0.0, 1.0);
      terms.push_back(hi);
      terms.push_back(-lo);
    }
  }
  return numerics::exact_sum(terms);
}

/// Phi_g(u) = inf{v : Psi_g(v) >= u}, by bisection over [min g, max g].
/// The bisection is deterministic, so outputs are nondecreasing in u.
inline std::vector<double> monotone_rearrangement(const SampledFunction& g,
                                                  const std::vector<double>& query) {
  g.validate();
  const auto [mn, mx] = std::minmax_element(g.values.begin(), g.values.end());
  std::vector<double> out;
  out.reserve(query.size());
  for (double u : query) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("monotone_rearrangement: query outside (0,1)");
    double lo = *mn;
    double hi = *mx;
    if (psi(g, lo) >= u) {
      out.push_back(lo);
      continue;
    }
    // Invariant: psi(lo) < u <= psi(hi).
    for (int it = 0; it < 2000; ++it) {
      const double mid = lo + 0.5 * (hi - lo);
      if (mid <= lo || mid >= hi) break;
      if (psi(g, mid) >= u) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    out.push_back(hi);
  }
  return out;
}

struct ChoiceProbEstimate {
  CovariatePoint w;
  double a = 0.25;
  double b = 0.75;
  double p_hat = 0.0;
  double tau_w_hat = 0.0;
  std::optional<double> se_hat;
  int n_sign_changes = 0;
};

namespace detail {

struct PathSigns {
  std::vector<std::size_t> index;  // grid points whose clipped cell is non-empty
  std::vector<double> g;
  std::vector<std::pair<double, double>> cells;
};

inline double path_index_value(const CoefficientPath& path, std::size_t i, const CovariatePoint& w) {
  return static_cast<double>(path.s_hat[i]) * w.z + w.x.dot(path.b_hat[i]);
}

inline PathSigns path_signs(const CoefficientPath& path, const CovariatePoint& w, double a, double b) {
  constexpr double kCover = 1e-12;
  if (!(a < b)) throw DomainError("choice_prob: need a < b");
  if (path.size() == 0) throw DomainError("choice_prob: empty path");
  if (w.x.size() != path.d()) throw DomainError("choice_prob: covariate dimension mismatch");
  if (a < path.taus.front() - kCover || b > path.taus.back() + kCover) {
    throw DomainError("choice_prob: [" + csv::format_double(a) + ", " + csv::format_double(b) +
                      "] not covered by the path grid [" + csv::format_double(path.taus.front()) +
                      ", " + csv::format_double(path.taus.back()) + "]");
  }
  PathSigns out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto cell = midpoint_cell(path.taus, i, a, b);
    if (!(cell.second > cell.first)) continue;
    out.index.push_back(i);
    out.g.push_back(path_index_value(path, i, w));
    out.cells.push_back(cell);
  }
  if (out.index.empty()) throw DomainError("choice_prob: no grid point inside [a, b]");
  return out;
}

}  // namespace detail

/// Midpoint-rule p_hat and tau_w_hat = a + int_a^b I{g <= 0}. Sums are
/// exactly rounded, so a positive run ending at b contributes 1 - (run start)
/// independently of b.
inline ChoiceProbEstimate choice_prob(const CoefficientPath& path, const CovariatePoint& w, double a,
                                      double b) {
  const auto ps = detail::path_signs(path, w, a, b);
  std::vector<double> pos{1.0, -b};
  std::vector<double> neg{a};
  int changes = 0;
  for (std::size_t k = 0; k < ps.g.size(); ++k) {
    const auto [lo, hi] = ps.cells[k];
    if (ps.g[k] >= 0.0) {
      pos.push_back(hi);
      pos.push_back(-lo);
    }
    if (ps.g[k] <= 0.0) {
      neg.push_back(hi);
      neg.push_back(-lo);
    }
    if (k > 0 && (ps.g[k] >= 0.0) != (ps.g[k - 1] >= 0.0)) ++changes;
  }
  ChoiceProbEstimate est;
  est.w = w;
  est.a = a;
  est.b = b;
  est.p_hat = numerics::exact_sum(pos);
  est.tau_w_hat = numerics::exact_sum(neg);
  est.n_sign_changes = changes;
  return est;
}

namespace detail {

inline double checked_abs_slope(double slope) {
  if (!(std::abs(slope) >= 1e-8)) {
    throw IllConditionedCrossing("|w'Delta| = " + csv::format_double(std::abs(slope)) +
                                 " is below 1e-8 at the crossing");
  }
  return std::abs(slope);
}

inline double path_scale(const CoefficientPath& path, Eigen::Index n) {
  if (!(path.h > 0.0)) throw DomainError("choice_prob_se: path carries no bandwidth");
  if (n < 1) throw DomainError("choice_prob_se: sample size unknown");
  return static_cast<double>(n) * path.h;
}

}  // namespace detail

/// Oracle mode: |w'Delta|^{-1} sqrt(x' Q^{-1} Sigma Q^{-1} x / (n h)) at the
/// true crossing level, with population Q, Sigma and Delta.
inline double choice_prob_se(const CoefficientPath& path, const ChoiceProbEstimate& est,
                             const DGPSpec& dgp, const KernelSpec& kernel) {
  const double nh = detail::path_scale(path, path.n);
  const double tau = true_tau_w(dgp, est.w);
  const Vector delta = population_delta(dgp, tau);
  const double slope = detail::checked_abs_slope(est.w.z * delta[0] + est.w.x.dot(delta.tail(dgp.d())));
  const Matrix V = sandwich_covariance(dgp, tau, kernel);
  return std::sqrt(est.w.x.dot(V * est.w.x) / nh) / slope;
}

/// Data mode: crossing at tau_w_hat, slope from a +-5 cell symmetric
/// difference of the path, Q from the plug-in Hessian and Sigma from
/// (1/(n h)) sum (y - (1 - tau))^2 K(u)^2 x x'.
inline double choice_prob_se(const CoefficientPath& path, const ChoiceProbEstimate& est,
                             const Dataset& data, const KernelSpec& kernel) {
  if (data.d() != path.d()) throw DomainError("choice_prob_se: data and path dimensions differ");
  const double nh = detail::path_scale(path, data.n());
  const auto& taus = path.taus;
  const auto nearest = static_cast<std::size_t>(
      std::min_element(taus.begin(), taus.end(),
                       [&](double l, double r) {
                         return std::abs(l - est.tau_w_hat) < std::abs(r - est.tau_w_hat);
                       }) -
      taus.begin());
  constexpr std::size_t kWindow = 5;
  const std::size_t lo = nearest >= kWindow ? nearest - kWindow : 0;
  const std::size_t hi = std::min(nearest + kWindow, taus.size() - 1);
  if (hi == lo) throw IllConditionedCrossing("path has a single grid point; slope undefined");
  const double slope = detail::checked_abs_slope(
      (detail::path_index_value(path, hi, est.w) - detail::path_index_value(path, lo, est.w)) /
      (taus[hi] - taus[lo]));

  ScorePoint pt;
  pt.s = path.s_hat[nearest];
  pt.b = path.b_hat[nearest];
  pt.tau = taus[nearest];
  pt.h = path.h;
  const Matrix Q = score_hessian(data, pt, kernel);
  const Vector margin = data.x * pt.b + static_cast<double>(pt.s) * data.z;
  Matrix meat = Matrix::Zero(data.d(), data.d());
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double k = kernel.K(margin[i] / pt.h);
    const double r = (data.y[i] - (1.0 - pt.tau)) * k;
    if (r == 0.0) continue;
    meat.noalias() += (r * r) * data.x.row(i).transpose() * data.x.row(i);
  }
  meat /= nh;
  Eigen::FullPivLU<Matrix> lu(Q);
  if (!lu.isInvertible()) throw NumericError("choice_prob_se: plug-in Hessian is singular");
  const Vector qx = lu.solve(est.w.x);
  const double var = qx.dot(meat * qx) / nh;
  if (!(var >= 0.0) || !std::isfinite(var)) throw NumericError("choice_prob_se: invalid plug-in variance");
  return std::sqrt(var) / slope;
}

struct LinearizationCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double xi = 0.0;
  double c_h = 0.0;
  double g_prime = 0.0;
  bool pass = false;
};

namespace detail {

/// int_a^b I{f(u) <= 0} du: dense sign scan, then toms748 on every bracket.
inline double sublevel_measure(const std::function<double(double)>& f, double a, double b,
                               std::size_t points = 20001) {
  std::vector<double> u(points);
  std::vector<double> fu(points);
  for (std::size_t i = 0; i < points; ++i) {
    u[i] = i + 1 == points ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
    fu[i] = f(u[i]);
  }
  std::vector<double> cuts{a};
  for (std::size_t i = 0; i + 1 < points; ++i) {
    if ((fu[i] <= 0.0) == (fu[i + 1] <= 0.0)) continue;
    double root;
    if (fu[i] == 0.0) {
      root = u[i];
    } else if (fu[i + 1] == 0.0) {
      root = u[i + 1];
    } else {
      std::uintmax_t iters = 200;
      const auto r = boost::math::tools::toms748_solve(
          f, u[i], u[i + 1], fu[i], fu[i + 1], boost::math::tools::eps_tolerance<double>(52), iters);
      root = 0.5 * (r.first + r.second);
    }
    cuts.push_back(root);
  }
  cuts.push_back(b);
  std::vector<double> terms;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    if (!(cuts[j + 1] > cuts[j])) continue;
    if (f(0.5 * (cuts[j] + cuts[j + 1])) <= 0.0) {
      terms.push_back(cuts[j + 1]);
      terms.push_back(-cuts[j]);
    }
  }
  return numerics::exact_sum(terms);
}

inline double derivative_at(const std::function<double(double)>& g, double u0) {
  auto central = [&](double d) { return (g(u0 + d) - g(u0 - d)) / (2.0 * d); };
  constexpr double kStep = 1e-3;
  return (4.0 * central(0.5 * kStep) - central(kStep)) / 3.0;
}

}  // namespace detail

/// Both sides of the crossing linearization bound
///   |int I{g<=0} - int I{h<=0} - h(u0)/|g'(u0)|| <= (2 xi(eps) + 4 C_H eps^{1+gamma}) / |g'(u0)|
/// on [a, b]. xi and C_H come from a 10^4-point grid on [u0 - eps, u0 + eps];
/// C_H is the sharpest constant with |g(u) - g(u0) - g'(u0)(u - u0)| <= C_H |u - u0|^{1+gamma}.
inline LinearizationCheck linearization_bound_check(const std::function<double(double)>& g,
                                                    const std::function<double(double)>& h, double u0,
                                                    double eps, double a, double b, double gamma = 1.0,
                                                    const std::function<double(double)>& g_prime = {}) {
  if (!(eps > 0.0) || !(gamma > 0.0)) throw DomainError("linearization check: eps and gamma must be > 0");
  if (!(a < b) || a < 0.0 || b > 1.0) throw DomainError("linearization check: need 0 <= a < b <= 1");
  if (std::abs(g(u0)) > 1e-12) throw PreconditionNotMet("g(u0) is not zero within 1e-12");
  if (u0 - eps < a || u0 + eps > b) throw PreconditionNotMet("[u0 - eps, u0 + eps] is not inside [a, b]");
  LinearizationCheck out;
  out.g_prime = g_prime ? g_prime(u0) : detail::derivative_at(g, u0);
  const double gp = std::abs(out.g_prime);
  if (!(gp > 0.0)) throw PreconditionNotMet("g'(u0) vanishes");

  constexpr int kGrid = 10000;
  const double hu0 = h(u0);
  const double gu0 = g(u0);
  for (int i = 0; i < kGrid; ++i) {
    const double u = u0 - eps + 2.0 * eps * static_cast<double>(i) / static_cast<double>(kGrid - 1);
    out.xi = std::max(out.xi, std::abs(hu0 - h(u) - (gu0 - g(u))));
    const double r = std::abs(u - u0);
    if (r > 0.0) {
      out.c_h = std::max(out.c_h, std::abs(g(u) - gu0 - out.g_prime * (u - u0)) / std::pow(r, 1.0 + gamma));
    }
  }
  const double pow_eps = std::pow(eps, 1.0 + gamma);
  const double need = std::abs(hu0) + 2.0 * (out.xi + out.c_h * pow_eps) / gp;
  if (need > eps) {
    throw PreconditionNotMet("|h(u0)| + 2(xi + C_H eps^(1+gamma))/|g'(u0)| = " + csv::format_double(need) +
                             " exceeds eps = " + csv::format_double(eps));
  }
  const double ig = detail::sublevel_measure(g, a, b);
  const double ih = detail::sublevel_measure(h, a, b);
  out.lhs = std::abs(ig - ih - hu0 / gp);
  out.rhs = (2.0 * out.xi + 4.0 * out.c_h * pow_eps) / gp;
  out.pass = out.lhs <= out.rhs + 1e-9;
  return out;
}

}  // namespace bqproc
