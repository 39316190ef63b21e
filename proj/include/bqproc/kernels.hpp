#pragma once

// Higher-order smoothing kernels K, their antiderivatives Kc(u) = int_{-inf}^u K,
// and the derivative K'. Kc approximates the indicator I{u >= 0}.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bqproc/error.hpp"
#include "bqproc/numerics.hpp"

namespace bqproc {

/// Kernel values at one point, computed together so exp/erfc run once.
struct KernelValues {
  double Kc = 0.0;
  double K = 0.0;
  double Kprime = 0.0;
};

/// Beyond this |u| both Gaussian-based kernels are within 1e-17 of the
/// indicator and their density terms underflow relative to O(1) sums.
inline constexpr double kGaussTailCut = 9.0;

/// Standard normal density; order 2.
struct Gauss2Kernel {
  static constexpr int order = 2;
  static constexpr double tail_cut = kGaussTailCut;

  double K(double u) const { return numerics::normal_pdf(u); }
  double Kc(double u) const { return numerics::normal_cdf(u); }
  double Kprime(double u) const { return -u * numerics::normal_pdf(u); }
  KernelValues eval(double u) const {
    const double phi = numerics::normal_pdf(u);
    return {numerics::normal_cdf(u), phi, -u * phi};
  }
};

/// ((3 - v^2) / 2) phi(v); second moment vanishes, so order 4.
struct Gauss4Kernel {
  static constexpr int order = 4;
  static constexpr double tail_cut = kGaussTailCut;

  double K(double u) const { return 0.5 * (3.0 - u * u) * numerics::normal_pdf(u); }
  // int_{-inf}^u v^2 phi = Phi(u) - u phi(u), hence Kc = Phi + u phi / 2.
  double Kc(double u) const { return numerics::normal_cdf(u) + 0.5 * u * numerics::normal_pdf(u); }
  double Kprime(double u) const { return 0.5 * u * (u * u - 5.0) * numerics::normal_pdf(u); }
  KernelValues eval(double u) const {
    const double phi = numerics::normal_pdf(u);
    return {numerics::normal_cdf(u) + 0.5 * u * phi, 0.5 * (3.0 - u * u) * phi,
            0.5 * u * (u * u - 5.0) * phi};
  }
};

/// User-supplied kernel from plain callables. Slow path; used for validation
/// experiments and tests.
struct CustomKernel {
  std::function<double(double)> K_fn;
  std::function<double(double)> Kc_fn;
  std::function<double(double)> Kprime_fn;
  static constexpr double tail_cut = std::numeric_limits<double>::infinity();

  double K(double u) const { return K_fn(u); }
  double Kc(double u) const { return Kc_fn(u); }
  double Kprime(double u) const { return Kprime_fn(u); }
  KernelValues eval(double u) const { return {Kc_fn(u), K_fn(u), Kprime_fn(u)}; }
};

class KernelSpec {
 public:
  using Impl = std::variant<Gauss2Kernel, Gauss4Kernel, CustomKernel>;

  static KernelSpec gauss2() {
    // int K^2 = 1 / (2 sqrt(pi)), int v^2 K = 1.
    return KernelSpec("gauss2", 2, 1.0, Gauss2Kernel{}, 0.5 / std::sqrt(std::numbers::pi), 1.0, {});
  }
  static KernelSpec gauss4() {
    // int K^2 = 27 / (32 sqrt(pi)), int v^4 K = (3*3 - 15) / 2 = -3.
    return KernelSpec("gauss4", 4, 1.0, Gauss4Kernel{}, 27.0 / (32.0 * std::sqrt(std::numbers::pi)),
                      -3.0, {-std::numbers::sqrt3, std::numbers::sqrt3});
  }

  /// Kernel from callables; `breakpoints` lists discontinuities and sign
  /// changes of K so the validation quadrature can split there. K^2 and k-th moments are
  /// computed numerically on [-10 support_hint, 10 support_hint].
  static KernelSpec custom(std::string name, int order, double support_hint, CustomKernel fns,
                           std::vector<double> breakpoints = {}) {
    if (order < 2) throw ConfigError("kernel order must be >= 2");
    if (!(support_hint > 0.0)) throw ConfigError("support_hint must be positive");
    KernelSpec spec(std::move(name), order, support_hint, std::move(fns), 0.0, 0.0,
                    std::move(breakpoints));
    const double R = spec.quadrature_radius();
    spec.k_squared_ = numerics::integrate([&](double v) { const double k = spec.K(v); return k * k; },
                                          -R, R, spec.breakpoints_, 1e-6)
                          .value;
    spec.kth_moment_ = numerics::integrate([&](double v) { return std::pow(v, order) * spec.K(v); },
                                           -R, R, spec.breakpoints_, 1e-6)
                           .value;
    return spec;
  }

  const std::string& name() const { return name_; }
  int order() const { return order_; }
  double support_hint() const { return support_hint_; }
  double quadrature_radius() const { return 10.0 * support_hint_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  double K(double u) const { return std::visit([u](const auto& k) { return k.K(u); }, impl_); }
  double Kc(double u) const { return std::visit([u](const auto& k) { return k.Kc(u); }, impl_); }
  double Kprime(double u) const {
    return std::visit([u](const auto& k) { return k.Kprime(u); }, impl_);
  }

  /// int K(v)^2 dv.
  double squared_integral() const { return k_squared_; }
  /// int v^k K(v) dv with k = order().
  double kth_moment() const { return kth_moment_; }

  /// Dispatch once to the concrete kernel type so hot loops inline.
  template <class F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), impl_);
  }

 private:
  KernelSpec(std::string name, int order, double support_hint, Impl impl, double k_squared,
             double kth_moment, std::vector<double> breakpoints)
      : name_(std::move(name)),
        order_(order),
        support_hint_(support_hint),
        impl_(std::move(impl)),
        k_squared_(k_squared),
        kth_moment_(kth_moment),
        breakpoints_(std::move(breakpoints)) {}

  std::string name_;
  int order_;
  double support_hint_;
  Impl impl_;
  double k_squared_;
  double kth_moment_;
  std::vector<double> breakpoints_;
};

inline KernelSpec builtin_kernel(std::string_view name) {
  if (name == "gauss2") return KernelSpec::gauss2();
  if (name == "gauss4") return KernelSpec::gauss4();
  throw ConfigError("unknown kernel '" + std::string(name) + "' (expected gauss2 or gauss4)");
}

struct TailSample {
  double x = 0.0;
  double scaled_sup = 0.0;  // x * sup_{|a| > x} |K(a)|
};

struct ValidationReport {
  std::string kernel;
  int order = 0;
  double tol = 0.0;
  double integral = 0.0;                 // int K
  std::vector<double> moments;           // int v^j K for j = 1 .. order-1
  double abs_kth_moment = 0.0;           // int |v^k K|
  double kth_moment = 0.0;               // int v^k K
  std::vector<TailSample> tail_decay;
  double max_quadrature_error = 0.0;
  bool pass = false;
  std::vector<std::string> failures;
};

/// Quadrature check of the moment conditions: int K = 1 and int v^j K = 0
/// for 1 <= j < k, each within `tol`.
inline ValidationReport validate_moments(const KernelSpec& kernel, double tol) {
  if (!(tol > 0.0)) throw ConfigError("validate_moments: tol must be positive");
  const double R = kernel.quadrature_radius();
  const auto& br = kernel.breakpoints();
  ValidationReport rep;
  rep.kernel = kernel.name();
  rep.order = kernel.order();
  rep.tol = tol;

  auto quad = [&](auto&& f) {
    auto r = numerics::integrate(f, -R, R, br, 1e-10);
    rep.max_quadrature_error = std::max(rep.max_quadrature_error, r.error);
    return r.value;
  };

  rep.integral = quad([&](double v) { return kernel.K(v); });
  if (!(std::abs(rep.integral - 1.0) <= tol)) {
    rep.failures.push_back("int K = " + std::to_string(rep.integral) + " differs from 1");
  }
  for (int j = 1; j < kernel.order(); ++j) {
    const double m = quad([&](double v) { return std::pow(v, j) * kernel.K(v); });
    rep.moments.push_back(m);
    if (!(std::abs(m) <= tol)) {
      rep.failures.push_back("moment " + std::to_string(j) + " = " + std::to_string(m));
    }
  }
  const int k = kernel.order();
  rep.kth_moment = quad([&](double v) { return std::pow(v, k) * kernel.K(v); });
  rep.abs_kth_moment = quad([&](double v) { return std::abs(std::pow(v, k) * kernel.K(v)); });

  for (double x : {1.0, 2.0, 4.0, 8.0}) {
    double sup = 0.0;
    const int m = 4000;
    for (int i = 0; i <= m; ++i) {
      const double a = x + (R - x) * i / m;
      sup = std::max({sup, std::abs(kernel.K(a)), std::abs(kernel.K(-a))});
    }
    rep.tail_decay.push_back({x, x * sup});
  }
  rep.pass = rep.failures.empty();
  return rep;
}

/// max over `grid` of |Kc(u) - int_{-R}^u K| with R = 10 support_hint.
inline double antiderivative_consistency(const KernelSpec& kernel, std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("antiderivative_consistency: empty grid");
  const double R = kernel.quadrature_radius();
  double gap = 0.0;
  for (double u : grid) {
    if (!std::isfinite(u)) throw ConfigError("antiderivative_consistency: non-finite grid point");
    double numeric = 0.0;
    if (u > -R) {
      numeric = numerics::integrate([&](double v) { return kernel.K(v); }, -R, u,
                                    kernel.breakpoints(), 1e-10)
                    .value;
    }
    gap = std::max(gap, std::abs(kernel.Kc(u) - numeric));
  }
  return gap;
}

}  // namespace bqproc
