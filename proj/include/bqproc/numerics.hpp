#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bqproc/error.hpp"

namespace bqproc::numerics {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kInvSqrt2 = 0.707106781186547524400844362105;

inline double normal_pdf(double u) { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }
inline double normal_cdf(double u) { return 0.5 * std::erfc(-u * kInvSqrt2); }

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Correctly rounded sum of finite doubles (Shewchuk partials with
/// half-even final rounding). Terms that cancel in exact arithmetic cancel
/// here, so sums over telescoping cell boundaries are order independent.
inline double exact_sum(std::span<const double> terms) {
  std::vector<double> partials;
  for (double x : terms) {
    std::size_t i = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  if (partials.empty()) return 0.0;
  std::size_t n = partials.size();
  double hi = partials[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials[--n];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive Gauss-Kronrod on [a, b], split at the given interior breakpoints.
/// Throws NumericError when the summed error estimate exceeds `max_error`.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, std::span<const double> breaks = {},
                           double max_error = 1e-9) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  std::vector<double> cuts{a};
  for (double c : breaks) {
    if (c > a && c < b) cuts.push_back(c);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  QuadratureResult out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    double err = 0.0;
    out.value += GK::integrate(f, cuts[i], cuts[i + 1], 15, 1e-14, &err);
    out.error += err;
  }
  if (!(out.error <= max_error) || !std::isfinite(out.value)) {
    throw NumericError("quadrature did not converge on [" + std::to_string(a) + ", " +
                       std::to_string(b) + "]: value " + std::to_string(out.value) +
                       ", error estimate " + std::to_string(out.error));
  }
  return out;
}

/// Tensor-product Gauss-Legendre rule on a box, one factor per interval.
struct TensorRule {
  std::vector<std::vector<double>> points;  // each of length dims
  std::vector<double> weights;              // sum to the box volume
};

inline TensorRule gauss_legendre_box(std::span<const std::pair<double, double>> box) {
  using GL = boost::math::quadrature::gauss<double, 30>;
  const auto& abs = GL::abscissa();
  const auto& wts = GL::weights();
  std::vector<double> ref_nodes;
  std::vector<double> ref_weights;
  for (std::size_t i = 0; i < abs.size(); ++i) {
    ref_nodes.push_back(abs[i]);
    ref_weights.push_back(wts[i]);
    if (abs[i] != 0.0) {
      ref_nodes.push_back(-abs[i]);
      ref_weights.push_back(wts[i]);
    }
  }
  TensorRule rule;
  rule.points.push_back({});
  rule.weights.push_back(1.0);
  for (const auto& [lo, hi] : box) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    TensorRule next;
    for (std::size_t p = 0; p < rule.points.size(); ++p) {
      for (std::size_t k = 0; k < ref_nodes.size(); ++k) {
        auto pt = rule.points[p];
        pt.push_back(mid + half * ref_nodes[k]);
        next.points.push_back(std::move(pt));
        next.weights.push_back(rule.weights[p] * half * ref_weights[k]);
      }
    }
    rule = std::move(next);
  }
  return rule;
}

}  // namespace bqproc::numerics
