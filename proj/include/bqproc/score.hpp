#pragma once

// Raw and kernel-smoothed maximum-score objectives for beta = (s, b')':
//   raw:      (1/n) sum (y_i - (1 - tau)) I{x_i'b + s z_i >= 0}
//   smoothed: (1/n) sum (y_i - (1 - tau)) Kc((x_i'b + s z_i) / h)
// together with the analytic gradient and Hessian in b.

#include <cmath>
#include <cstdlib>
#include <vector>

#include <Eigen/Dense>

#include "bqproc/dataset.hpp"
#include "bqproc/dgp.hpp"
#include "bqproc/error.hpp"
#include "bqproc/kernels.hpp"
#include "bqproc/numerics.hpp"

namespace bqproc {

struct ScorePoint {
  int s = 1;
  Vector b;
  double tau = 0.5;
  double h = 1.0;

  void validate(Eigen::Index d, bool need_h = true) const {
    if (s != 1 && s != -1) throw DomainError("score point: s must be +1 or -1");
    if (b.size() != d) throw DomainError("score point: b has wrong dimension");
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("score point: tau must lie in (0,1)");
    if (need_h && !(h > 0.0)) throw DomainError("score point: h must be positive");
  }
};

struct ScoreEval {
  double value = 0.0;
  Vector gradient;  // empty unless requested
  Matrix hessian;   // empty unless requested
};

enum class ScoreOrder { value, gradient, hessian };

namespace detail {

template <class Kernel>
ScoreEval evaluate_smoothed(const Dataset& data, const ScorePoint& p, const Kernel& kernel,
                            ScoreOrder order) {
  const Eigen::Index n = data.n();
  const Eigen::Index d = data.d();
  const double shift = 1.0 - p.tau;
  const double inv_h = 1.0 / p.h;
  const bool want_grad = order != ScoreOrder::value;
  const bool want_hess = order == ScoreOrder::hessian;

  const Vector margin = data.x * p.b + static_cast<double>(p.s) * data.z;

  numerics::CompensatedSum value;
  std::vector<numerics::CompensatedSum> grad(want_grad ? static_cast<std::size_t>(d) : 0);
  std::vector<numerics::CompensatedSum> hess(
      want_hess ? static_cast<std::size_t>(d * (d + 1) / 2) : 0);

  for (Eigen::Index i = 0; i < n; ++i) {
    const double wgt = data.y[i] - shift;
    const double u = margin[i] * inv_h;
    if (std::abs(u) > Kernel::tail_cut) {
      if (u > 0.0) value.add(wgt);
      continue;
    }
    if (!want_grad) {
      value.add(wgt * kernel.Kc(u));
      continue;
    }
    const KernelValues kv = kernel.eval(u);
    value.add(wgt * kv.Kc);
    const double gk = wgt * kv.K;
    const auto xi = data.x.row(i);
    for (Eigen::Index j = 0; j < d; ++j) grad[static_cast<std::size_t>(j)].add(gk * xi[j]);
    if (want_hess) {
      const double hk = wgt * kv.Kprime;
      std::size_t idx = 0;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double hj = hk * xi[j];
        for (Eigen::Index l = j; l < d; ++l) hess[idx++].add(hj * xi[l]);
      }
    }
  }

  ScoreEval out;
  const double inv_n = 1.0 / static_cast<double>(n);
  out.value = value.value() * inv_n;
  if (want_grad) {
    out.gradient.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      out.gradient[j] = grad[static_cast<std::size_t>(j)].value() * inv_n * inv_h;
    }
  }
  if (want_hess) {
    out.hessian.resize(d, d);
    std::size_t idx = 0;
    const double scale = inv_n * inv_h * inv_h;
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index l = j; l < d; ++l) {
        const double v = hess[idx++].value() * scale;
        out.hessian(j, l) = v;
        out.hessian(l, j) = v;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Smoothed score with optional gradient / Hessian from one pass over the data.
inline ScoreEval evaluate_score(const Dataset& data, const ScorePoint& p, const KernelSpec& kernel,
                                ScoreOrder order) {
  p.validate(data.d());
  return kernel.visit([&](const auto& k) { return detail::evaluate_smoothed(data, p, k, order); });
}

/// Indicator version (ties x'b + s z = 0 count as active); h is ignored.
inline double raw_score(const Dataset& data, const ScorePoint& p) {
  p.validate(data.d(), false);
  const Vector margin = data.x * p.b + static_cast<double>(p.s) * data.z;
  numerics::CompensatedSum acc;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (margin[i] >= 0.0) acc.add(data.y[i] - (1.0 - p.tau));
  }
  return acc.value() / static_cast<double>(data.n());
}

inline double smoothed_score(const Dataset& data, const ScorePoint& p, const KernelSpec& kernel) {
  return evaluate_score(data, p, kernel, ScoreOrder::value).value;
}

/// (1/(n h)) sum (y_i - (1 - tau)) x_i K((x_i'b + s z_i) / h).
inline Vector score_gradient(const Dataset& data, const ScorePoint& p, const KernelSpec& kernel) {
  return evaluate_score(data, p, kernel, ScoreOrder::gradient).gradient;
}

/// (1/(n h^2)) sum (y_i - (1 - tau)) x_i x_i' K'((x_i'b + s z_i) / h).
inline Matrix score_hessian(const Dataset& data, const ScorePoint& p, const KernelSpec& kernel) {
  return evaluate_score(data, p, kernel, ScoreOrder::hessian).hessian;
}

/// Sigma_tau = tau (1 - tau) int K^2 int x x' f_Z(-s0 x'b_bar_tau) dP_X.
inline Matrix asymptotic_variance(const DGPSpec& dgp, double tau, const KernelSpec& kernel) {
  dgp.validate();
  if (!dgp.has_z_density()) throw DomainError("asymptotic_variance: z law has no density");
  const auto tb = true_beta(dgp, tau);
  const auto rule = detail::x_rule(dgp);
  Matrix acc = Matrix::Zero(dgp.d(), dgp.d());
  for (std::size_t k = 0; k < rule.weights.size(); ++k) {
    const auto [x, wt] = detail::x_node(dgp, rule, k);
    acc.noalias() += wt * dgp.z_density(-tb.s0 * x.dot(tb.b_bar)) * x * x.transpose();
  }
  return tau * (1.0 - tau) * kernel.squared_integral() * acc;
}

/// Q^{-1} Sigma_tau Q^{-1}: asymptotic covariance of sqrt(n h) (b_hat - b_bar).
inline Matrix sandwich_covariance(const DGPSpec& dgp, double tau, const KernelSpec& kernel) {
  const Matrix Qinv = population_Q(dgp, tau).inverse();
  const Matrix V = Qinv * asymptotic_variance(dgp, tau, kernel) * Qinv;
  return 0.5 * (V + V.transpose());
}

}  // namespace bqproc
