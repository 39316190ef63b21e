#pragma once

// Replicated experiments on a known DGP: simulate, fit the quantile process,
// evaluate choice probabilities, then summarize against population oracles.
// Every replication draws from its own counter-based stream, so results do not
// depend on the number of workers or on scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "bqproc/choiceprob.hpp"
#include "bqproc/dataset.hpp"
#include "bqproc/dgp.hpp"
#include "bqproc/error.hpp"
#include "bqproc/estimator.hpp"
#include "bqproc/kernels.hpp"
#include "bqproc/rng.hpp"
#include "bqproc/score.hpp"

namespace bqproc {

struct ExperimentConfig {
  DGPSpec dgp = reference_dgp();
  std::vector<long long> n_values{1000};
  std::vector<double> taus{0.5};
  int n_reps = 100;
  std::string kernel = "gauss2";
  double bandwidth_c = 1.0;
  std::vector<CovariatePoint> w_points;
  std::uint64_t seed = 17;
  double a = 0.25;
  double b = 0.75;
  // Second endpoint pair evaluated on the same fitted path.
  std::optional<std::pair<double, double>> alt_ab;
  OptimizerConfig optimizer;

  void validate() const {
    dgp.validate();
    if (n_reps < 2) throw ConfigError("experiment: n_reps must be >= 2");
    if (n_values.empty()) throw ConfigError("experiment: n_values is empty");
    for (auto n : n_values) {
      if (n < 50) throw ConfigError("experiment: every n must be >= 50");
    }
    validate_tau_grid(taus);
    builtin_kernel(kernel);
    if (!(bandwidth_c > 0.0)) throw ConfigError("experiment: bandwidth_c must be > 0");
    optimizer.validate();
    for (const auto& w : w_points) {
      if (w.x.size() != dgp.d()) throw ConfigError("experiment: w point dimension mismatch");
    }
    if (!w_points.empty()) {
      auto check = [&](double lo, double hi) {
        if (!(lo < hi)) throw ConfigError("experiment: need a < b");
        if (lo < taus.front() - 1e-12 || hi > taus.back() + 1e-12) {
          throw ConfigError("experiment: [a, b] not covered by the tau grid");
        }
      };
      check(a, b);
      if (alt_ab) check(alt_ab->first, alt_ab->second);
    }
  }
};

/// m equally spaced levels from lo to hi inclusive.
inline std::vector<double> tau_grid(double lo, double hi, int m) {
  if (m < 1) throw ConfigError("tau grid needs at least one point");
  if (m == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (m - 1.0);
  out.back() = hi;
  return out;
}

struct CoefRow {
  int rep = 0;
  long long n = 0;
  double tau = 0.0;
  int s_hat = 0;
  Vector b;
  double objective = 0.0;
  bool converged = false;
  bool failed = false;
};

struct ChoiceRow {
  int rep = 0;
  long long n = 0;
  int w_id = 0;
  double p_hat = 0.0;
  double tau_w_hat = 0.0;
  int n_sign_changes = 0;
  double p_hat_alt = std::numeric_limits<double>::quiet_NaN();
  bool failed = false;
};

struct ExperimentResults {
  std::vector<CoefRow> coef;
  std::vector<ChoiceRow> choice;
  int failed_replications = 0;
  int total_replications = 0;
  std::vector<std::string> failure_messages;
};

namespace detail {

struct TaskOutput {
  std::vector<CoefRow> coef;
  std::vector<ChoiceRow> choice;
  std::optional<std::string> failure;
};

inline TaskOutput run_task(const ExperimentConfig& cfg, const KernelSpec& kernel, int rep,
                           std::size_t n_idx) {
  const long long n = cfg.n_values[n_idx];
  const std::uint64_t stream = mix_stream(static_cast<std::uint64_t>(rep), n_idx);
  const double h = default_bandwidth(n, kernel.order(), cfg.bandwidth_c).h;
  OptimizerConfig opt = cfg.optimizer;
  opt.seed = mix_stream(cfg.optimizer.seed, stream);
  TaskOutput out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    const Dataset data = simulate(cfg.dgp, n, cfg.seed, stream);
    const CoefficientPath path = estimate_process(data, cfg.taus, h, kernel, opt);
    for (std::size_t t = 0; t < path.size(); ++t) {
      out.coef.push_back({rep, n, path.taus[t], path.s_hat[t], path.b_hat[t], path.objective[t],
                          path.converged(t), false});
    }
    for (std::size_t j = 0; j < cfg.w_points.size(); ++j) {
      const auto est = choice_prob(path, cfg.w_points[j], cfg.a, cfg.b);
      ChoiceRow row{rep, n, static_cast<int>(j), est.p_hat, est.tau_w_hat, est.n_sign_changes, nan, false};
      if (cfg.alt_ab) row.p_hat_alt = choice_prob(path, cfg.w_points[j], cfg.alt_ab->first, cfg.alt_ab->second).p_hat;
      out.choice.push_back(row);
    }
  } catch (const Error& e) {
    out.coef.clear();
    out.choice.clear();
    out.failure = std::string(e.what());
    for (double tau : cfg.taus) {
      out.coef.push_back({rep, n, tau, 0, Vector::Constant(cfg.dgp.d(), nan), nan, false, true});
    }
    for (std::size_t j = 0; j < cfg.w_points.size(); ++j) {
      out.choice.push_back({rep, n, static_cast<int>(j), nan, nan, 0, nan, true});
    }
  }
  return out;
}

}  // namespace detail

/// Runs every (replication, n) task on `workers` threads and reduces in
/// (replication, n) order. Throws EstimationError when more than 5% fail.
inline ExperimentResults run_experiment(const ExperimentConfig& cfg, int workers = 1) {
  cfg.validate();
  if (workers < 1) throw ConfigError("experiment: workers must be >= 1");
  const KernelSpec kernel = builtin_kernel(cfg.kernel);
  const std::size_t n_tasks = static_cast<std::size_t>(cfg.n_reps) * cfg.n_values.size();
  std::vector<detail::TaskOutput> outputs(n_tasks);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t t = next++; t < n_tasks; t = next++) {
      const int rep = static_cast<int>(t / cfg.n_values.size());
      outputs[t] = detail::run_task(cfg, kernel, rep, t % cfg.n_values.size());
    }
  };
  const int n_threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), n_tasks));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(work);
  }
  ExperimentResults res;
  res.total_replications = static_cast<int>(n_tasks);
  for (auto& o : outputs) {
    if (o.failure) {
      ++res.failed_replications;
      res.failure_messages.push_back(*o.failure);
    }
    res.coef.insert(res.coef.end(), o.coef.begin(), o.coef.end());
    res.choice.insert(res.choice.end(), o.choice.begin(), o.choice.end());
  }
  if (res.failed_replications * 20 > res.total_replications) {
    throw EstimationError(std::to_string(res.failed_replications) + " of " +
                          std::to_string(res.total_replications) +
                          " replications failed (limit 5%); first: " + res.failure_messages.front());
  }
  return res;
}

struct CoefCell {
  long long n = 0;
  double tau = 0.0;
  double h = 0.0;
  int n_ok = 0;
  bool reliable = false;
  double sign_rate = 0.0;  // share of fits with s_hat = s0
  Vector b_bar;
  Vector correction;        // oracle bias of b_hat, -Q^{-1} T_n
  Vector mean;
  Vector bias;              // mean - b_bar - correction
  Vector bias_uncorrected;  // mean - b_bar
  Vector sd;
  Vector rmse;
  Vector scaled_var;  // n h sd^2
  Vector oracle_var;  // diag Q^{-1} Sigma Q^{-1}
  Vector var_ratio;
  Vector coverage90;
};

struct ChoiceCell {
  long long n = 0;
  int w_id = 0;
  double p_true = 0.0;
  double se_oracle = 0.0;
  int n_ok = 0;
  bool reliable = false;
  double bias = 0.0;
  double sd = 0.0;
  double rmse = 0.0;
  double median_abs_error = 0.0;
  double coverage90 = 0.0;
  double mean_sign_changes = 0.0;
  double alt_exact_share = std::numeric_limits<double>::quiet_NaN();
};

struct CorrelationBlock {
  long long n = 0;
  int n_ok = 0;
  // Rows/cols ordered (tau_0 comp_0, ..., tau_0 comp_{d-1}, tau_1 comp_0, ...).
  Matrix corr;
};

struct McSummary {
  std::vector<CoefCell> coef;
  std::vector<ChoiceCell> choice;
  std::vector<CorrelationBlock> correlation;
  Eigen::Index d = 0;
  std::size_t n_taus = 0;

  double max_cross_tau_correlation(std::size_t n_idx) const {
    const auto& c = correlation.at(n_idx).corr;
    double m = 0.0;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      for (Eigen::Index j = 0; j < c.cols(); ++j) {
        if (i / d != j / d) m = std::max(m, std::abs(c(i, j)));
      }
    }
    return m;
  }
};

namespace detail {

inline constexpr double kZ90 = 1.6448536269514722;
inline constexpr int kReliableReps = 30;

struct Moments {
  double mean = 0.0;
  double sd = 0.0;  // 1/N divisor
};

inline Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  numerics::CompensatedSum s;
  for (double x : v) s.add(x);
  m.mean = s.value() / static_cast<double>(v.size());
  numerics::CompensatedSum q;
  for (double x : v) q.add((x - m.mean) * (x - m.mean));
  m.sd = std::sqrt(q.value() / static_cast<double>(v.size()));
  return m;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace detail

/// Oracle-centered moments, correlation blocks and coverage per cell.
inline McSummary summarize(const ExperimentResults& res, const ExperimentConfig& cfg) {
  const KernelSpec kernel = builtin_kernel(cfg.kernel);
  const Eigen::Index d = cfg.dgp.d();
  const std::size_t T = cfg.taus.size();
  McSummary out;
  out.d = d;
  out.n_taus = T;
  const auto s0 = true_beta(cfg.dgp, cfg.taus.front()).s0;

  for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
    const long long n = cfg.n_values[ni];
    const double h = default_bandwidth(n, kernel.order(), cfg.bandwidth_c).h;
    const double nh = static_cast<double>(n) * h;
    std::vector<std::vector<const CoefRow*>> by_tau(T);
    std::vector<int> rep_ok(static_cast<std::size_t>(cfg.n_reps), 1);
    for (const auto& r : res.coef) {
      if (r.n != n) continue;
      const auto t = static_cast<std::size_t>(
          std::lower_bound(cfg.taus.begin(), cfg.taus.end(), r.tau) - cfg.taus.begin());
      if (r.failed) {
        rep_ok[static_cast<std::size_t>(r.rep)] = 0;
        continue;
      }
      by_tau[t].push_back(&r);
    }

    std::vector<Vector> centering(T);
    for (std::size_t t = 0; t < T; ++t) {
      const double tau = cfg.taus[t];
      CoefCell cell;
      cell.n = n;
      cell.tau = tau;
      cell.h = h;
      cell.b_bar = true_beta(cfg.dgp, tau).b_bar;
      cell.correction = coefficient_bias(cfg.dgp, tau, kernel, h);
      centering[t] = cell.b_bar + cell.correction;
      const Matrix V = sandwich_covariance(cfg.dgp, tau, kernel);
      cell.oracle_var = V.diagonal();
      const auto& rows = by_tau[t];
      cell.n_ok = static_cast<int>(rows.size());
      cell.reliable = cell.n_ok >= detail::kReliableReps;
      int sign_hits = 0;
      for (const auto* r : rows) sign_hits += r->s_hat == s0 ? 1 : 0;
      cell.sign_rate = rows.empty() ? 0.0 : static_cast<double>(sign_hits) / static_cast<double>(rows.size());
      cell.mean.resize(d);
      cell.bias.resize(d);
      cell.bias_uncorrected.resize(d);
      cell.sd.resize(d);
      cell.rmse.resize(d);
      cell.scaled_var.resize(d);
      cell.var_ratio.resize(d);
      cell.coverage90.resize(d);
      for (Eigen::Index j = 0; j < d; ++j) {
        std::vector<double> v;
        v.reserve(rows.size());
        int covered = 0;
        const double half = detail::kZ90 * std::sqrt(cell.oracle_var[j] / nh);
        for (const auto* r : rows) {
          v.push_back(r->b[j]);
          if (std::abs(r->b[j] - cell.correction[j] - cell.b_bar[j]) <= half) ++covered;
        }
        const auto m = detail::moments(v);
        cell.mean[j] = m.mean;
        cell.bias[j] = m.mean - centering[t][j];
        cell.bias_uncorrected[j] = m.mean - cell.b_bar[j];
        cell.sd[j] = m.sd;
        cell.rmse[j] = std::sqrt(cell.bias[j] * cell.bias[j] + m.sd * m.sd);
        cell.scaled_var[j] = nh * m.sd * m.sd;
        cell.var_ratio[j] = cell.scaled_var[j] / cell.oracle_var[j];
        cell.coverage90[j] = rows.empty() ? 0.0 : static_cast<double>(covered) / static_cast<double>(rows.size());
      }
      out.coef.push_back(std::move(cell));
    }

    // Correlations over replications whose whole path succeeded.
    CorrelationBlock block;
    block.n = n;
    const Eigen::Index dim = static_cast<Eigen::Index>(T) * d;
    std::vector<Vector> obs(static_cast<std::size_t>(cfg.n_reps), Vector::Zero(dim));
    for (const auto& r : res.coef) {
      if (r.n != n || r.failed) continue;
      const auto t = static_cast<Eigen::Index>(
          std::lower_bound(cfg.taus.begin(), cfg.taus.end(), r.tau) - cfg.taus.begin());
      obs[static_cast<std::size_t>(r.rep)].segment(t * d, d) =
          std::sqrt(nh) * (r.b - centering[static_cast<std::size_t>(t)]);
    }
    Matrix X(0, dim);
    std::vector<Vector> good;
    for (std::size_t r = 0; r < obs.size(); ++r) {
      if (rep_ok[r]) good.push_back(obs[r]);
    }
    block.n_ok = static_cast<int>(good.size());
    X.resize(static_cast<Eigen::Index>(good.size()), dim);
    for (std::size_t r = 0; r < good.size(); ++r) X.row(static_cast<Eigen::Index>(r)) = good[r].transpose();
    block.corr = Matrix::Identity(dim, dim);
    if (good.size() >= 2) {
      const Matrix C = X.rowwise() - X.colwise().mean();
      const Matrix S = C.transpose() * C;
      for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
          if (i == j) continue;
          const double den = std::sqrt(S(i, i) * S(j, j));
          block.corr(i, j) = den > 0.0 ? std::clamp(S(i, j) / den, -1.0, 1.0) : 0.0;
        }
      }
    }
    out.correlation.push_back(std::move(block));

    for (std::size_t w = 0; w < cfg.w_points.size(); ++w) {
      const auto& wp = cfg.w_points[w];
      ChoiceCell cell;
      cell.n = n;
      cell.w_id = static_cast<int>(w);
      cell.p_true = true_choice_prob(cfg.dgp, wp);
      CoefficientPath shell;
      shell.h = h;
      shell.n = static_cast<Eigen::Index>(n);
      ChoiceProbEstimate est;
      est.w = wp;
      try {
        cell.se_oracle = choice_prob_se(shell, est, cfg.dgp, kernel);
      } catch (const DomainError&) {
        cell.se_oracle = std::numeric_limits<double>::quiet_NaN();
      }
      std::vector<double> p, abs_err;
      int covered = 0;
      int exact = 0;
      int alt_n = 0;
      double sign_changes = 0.0;
      for (const auto& r : res.choice) {
        if (r.n != n || r.w_id != cell.w_id || r.failed) continue;
        p.push_back(r.p_hat);
        abs_err.push_back(std::abs(r.p_hat - cell.p_true));
        if (std::abs(r.p_hat - cell.p_true) <= detail::kZ90 * cell.se_oracle) ++covered;
        sign_changes += r.n_sign_changes;
        if (!std::isnan(r.p_hat_alt)) {
          ++alt_n;
          if (r.p_hat_alt == r.p_hat) ++exact;
        }
      }
      cell.n_ok = static_cast<int>(p.size());
      cell.reliable = cell.n_ok >= detail::kReliableReps;
      const auto m = detail::moments(p);
      cell.bias = m.mean - cell.p_true;
      cell.sd = m.sd;
      cell.rmse = std::sqrt(cell.bias * cell.bias + m.sd * m.sd);
      cell.median_abs_error = detail::median(abs_err);
      if (cell.n_ok > 0) {
        cell.coverage90 = static_cast<double>(covered) / cell.n_ok;
        cell.mean_sign_changes = sign_changes / cell.n_ok;
      }
      if (alt_n > 0) cell.alt_exact_share = static_cast<double>(exact) / alt_n;
      out.choice.push_back(cell);
    }
  }
  return out;
}

struct RateFit {
  std::string label;
  double exponent = 0.0;  // slope of log rmse on log (n h)^{-1/2}
  std::vector<double> factors;              // rmse(n_i) / rmse(n_{i+1})
  std::vector<double> theoretical_factors;  // sqrt(n_{i+1} h_{i+1} / (n_i h_i))
};

struct RateReport {
  std::vector<RateFit> coefficient;  // per component, rmse averaged in square over tau
  std::vector<RateFit> choice;       // per w point
  RateFit choice_pooled;             // rmse pooled in square over w points
};

/// Least-squares slope of log(rmse) against log((n h)^{-1/2}).
inline RateFit fit_rate(std::string label, const std::vector<double>& nh, const std::vector<double>& rmse) {
  if (nh.size() < 2 || nh.size() != rmse.size()) throw ConfigError("rate_check: need >= 2 sample sizes");
  RateFit fit;
  fit.label = std::move(label);
  const std::size_t m = nh.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> xs(m), ys(m);
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = -0.5 * std::log(nh[i]);
    ys[i] = std::log(rmse[i]);
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  fit.exponent = sxy / sxx;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    fit.factors.push_back(rmse[i] / rmse[i + 1]);
    fit.theoretical_factors.push_back(std::sqrt(nh[i + 1] / nh[i]));
  }
  return fit;
}

inline RateReport rate_check(const McSummary& s, const ExperimentConfig& cfg) {
  if (cfg.n_values.size() < 2) throw ConfigError("rate_check: need >= 2 sample sizes");
  const KernelSpec kernel = builtin_kernel(cfg.kernel);
  std::vector<double> nh;
  for (auto n : cfg.n_values) {
    nh.push_back(static_cast<double>(n) * default_bandwidth(n, kernel.order(), cfg.bandwidth_c).h);
  }
  RateReport rep;
  for (Eigen::Index j = 0; j < s.d; ++j) {
    std::vector<double> rmse;
    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
      double acc = 0.0;
      int cnt = 0;
      for (const auto& c : s.coef) {
        if (c.n != cfg.n_values[ni]) continue;
        acc += c.rmse[j] * c.rmse[j];
        ++cnt;
      }
      rmse.push_back(std::sqrt(acc / cnt));
    }
    rep.coefficient.push_back(fit_rate("b_" + std::to_string(j + 1), nh, rmse));
  }
  if (!cfg.w_points.empty()) {
    std::vector<double> pooled(cfg.n_values.size(), 0.0);
    for (std::size_t w = 0; w < cfg.w_points.size(); ++w) {
      std::vector<double> rmse;
      for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
        for (const auto& c : s.choice) {
          if (c.n == cfg.n_values[ni] && c.w_id == static_cast<int>(w)) {
            rmse.push_back(c.rmse);
            pooled[ni] += c.rmse * c.rmse;
          }
        }
      }
      rep.choice.push_back(fit_rate("w_" + std::to_string(w), nh, rmse));
    }
    for (auto& v : pooled) v = std::sqrt(v / static_cast<double>(cfg.w_points.size()));
    rep.choice_pooled = fit_rate("p_hat_pooled", nh, pooled);
  }
  return rep;
}

inline void write_results_csv(std::ostream& out, const ExperimentResults& res, Eigen::Index d) {
  out << "rep,n,tau,s_hat";
  for (Eigen::Index j = 0; j < d; ++j) out << ",b_" << j + 1;
  out << ",objective,converged,failed\n";
  for (const auto& r : res.coef) {
    out << r.rep << ',' << r.n << ',' << csv::format_double(r.tau) << ',' << r.s_hat;
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << csv::format_double(r.b[j]);
    out << ',' << csv::format_double(r.objective) << ',' << (r.converged ? 1 : 0) << ',' << (r.failed ? 1 : 0)
        << '\n';
  }
}

inline void write_choice_csv(std::ostream& out, const ExperimentResults& res) {
  out << "rep,n,w_id,p_hat,tau_w_hat,n_sign_changes,p_hat_alt,failed\n";
  for (const auto& r : res.choice) {
    out << r.rep << ',' << r.n << ',' << r.w_id << ',' << csv::format_double(r.p_hat) << ','
        << csv::format_double(r.tau_w_hat) << ',' << r.n_sign_changes << ',' << csv::format_double(r.p_hat_alt)
        << ',' << (r.failed ? 1 : 0) << '\n';
  }
}

/// Long format `statistic,n,tau,w_id,component,value`; empty key fields do not apply.
inline void write_summary_csv(std::ostream& out, const McSummary& s) {
  out << "statistic,n,tau,w_id,component,value\n";
  auto row = [&](const std::string& stat, long long n, std::optional<double> tau, std::optional<int> w,
                 std::optional<int> comp, double v) {
    out << stat << ',' << n << ',' << (tau ? csv::format_double(*tau) : "") << ',' << (w ? std::to_string(*w) : "")
        << ',' << (comp ? std::to_string(*comp) : "") << ',' << csv::format_double(v) << '\n';
  };
  for (const auto& c : s.coef) {
    row("n_ok", c.n, c.tau, {}, {}, c.n_ok);
    row("reliable", c.n, c.tau, {}, {}, c.reliable ? 1.0 : 0.0);
    row("sign_rate", c.n, c.tau, {}, {}, c.sign_rate);
    row("h", c.n, c.tau, {}, {}, c.h);
    for (Eigen::Index j = 0; j < c.mean.size(); ++j) {
      const int k = static_cast<int>(j + 1);
      row("b_bar", c.n, c.tau, {}, k, c.b_bar[j]);
      row("bias_correction", c.n, c.tau, {}, k, c.correction[j]);
      row("mean", c.n, c.tau, {}, k, c.mean[j]);
      row("bias", c.n, c.tau, {}, k, c.bias[j]);
      row("bias_uncorrected", c.n, c.tau, {}, k, c.bias_uncorrected[j]);
      row("sd", c.n, c.tau, {}, k, c.sd[j]);
      row("rmse", c.n, c.tau, {}, k, c.rmse[j]);
      row("scaled_var", c.n, c.tau, {}, k, c.scaled_var[j]);
      row("oracle_var", c.n, c.tau, {}, k, c.oracle_var[j]);
      row("var_ratio", c.n, c.tau, {}, k, c.var_ratio[j]);
      row("coverage90", c.n, c.tau, {}, k, c.coverage90[j]);
    }
  }
  for (std::size_t ni = 0; ni < s.correlation.size(); ++ni) {
    const auto& b = s.correlation[ni];
    row("max_cross_tau_abs_corr", b.n, {}, {}, {}, s.max_cross_tau_correlation(ni));
    for (Eigen::Index i = 0; i < b.corr.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.corr.cols(); ++j) {
        row("corr_" + std::to_string(i) + "_" + std::to_string(j), b.n, {}, {}, {}, b.corr(i, j));
      }
    }
  }
  for (const auto& c : s.choice) {
    row("p_true", c.n, {}, c.w_id, {}, c.p_true);
    row("p_n_ok", c.n, {}, c.w_id, {}, c.n_ok);
    row("p_reliable", c.n, {}, c.w_id, {}, c.reliable ? 1.0 : 0.0);
    row("p_bias", c.n, {}, c.w_id, {}, c.bias);
    row("p_sd", c.n, {}, c.w_id, {}, c.sd);
    row("p_rmse", c.n, {}, c.w_id, {}, c.rmse);
    row("p_median_abs_error", c.n, {}, c.w_id, {}, c.median_abs_error);
    row("p_se_oracle", c.n, {}, c.w_id, {}, c.se_oracle);
    row("p_coverage90", c.n, {}, c.w_id, {}, c.coverage90);
    row("p_mean_sign_changes", c.n, {}, c.w_id, {}, c.mean_sign_changes);
    if (!std::isnan(c.alt_exact_share)) row("p_alt_exact_share", c.n, {}, c.w_id, {}, c.alt_exact_share);
  }
}

// Manifest: everything needed to re-create a run bit-exactly.

inline nlohmann::json to_json(const DGPSpec& d) {
  nlohmann::json j;
  j["name"] = d.name;
  j["gamma"] = std::vector<double>(d.gamma.data(), d.gamma.data() + d.gamma.size());
  j["lambda"] = d.lambda;
  j["error"] = to_string(d.error);
  nlohmann::json iv = nlohmann::json::array();
  for (const auto& [lo, hi] : d.x_intervals) iv.push_back({lo, hi});
  j["x_intervals"] = iv;
  j["z_lo"] = d.z_lo;
  j["z_hi"] = d.z_hi;
  return j;
}

inline DGPSpec dgp_from_json(const nlohmann::json& j) {
  DGPSpec d;
  d.name = j.at("name").get<std::string>();
  const auto g = j.at("gamma").get<std::vector<double>>();
  d.gamma = Eigen::Map<const Vector>(g.data(), static_cast<Eigen::Index>(g.size()));
  d.lambda = j.at("lambda").get<double>();
  d.error = parse_error_dist(j.at("error").get<std::string>());
  d.x_intervals.clear();
  for (const auto& p : j.at("x_intervals")) d.x_intervals.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  d.z_lo = j.at("z_lo").get<double>();
  d.z_hi = j.at("z_hi").get<double>();
  return d;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["dgp"] = to_json(c.dgp);
  j["n_values"] = c.n_values;
  j["taus"] = c.taus;
  j["n_reps"] = c.n_reps;
  j["kernel"] = c.kernel;
  j["bandwidth_c"] = c.bandwidth_c;
  nlohmann::json w = nlohmann::json::array();
  for (const auto& p : c.w_points) {
    w.push_back({{"z", p.z}, {"x", std::vector<double>(p.x.data(), p.x.data() + p.x.size())}});
  }
  j["w_points"] = w;
  j["seed"] = c.seed;
  j["a"] = c.a;
  j["b"] = c.b;
  j["alt_ab"] = c.alt_ab ? nlohmann::json{c.alt_ab->first, c.alt_ab->second} : nlohmann::json(nullptr);
  j["optimizer"] = {{"n_starts", c.optimizer.n_starts},   {"max_iters", c.optimizer.max_iters},
                    {"grad_tol", c.optimizer.grad_tol},   {"step_tol", c.optimizer.step_tol},
                    {"box_radius", c.optimizer.box_radius}, {"seed", c.optimizer.seed},
                    {"refresh_every", c.optimizer.refresh_every}};
  return j;
}

inline ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.dgp = dgp_from_json(j.at("dgp"));
  c.n_values = j.at("n_values").get<std::vector<long long>>();
  c.taus = j.at("taus").get<std::vector<double>>();
  c.n_reps = j.at("n_reps").get<int>();
  c.kernel = j.at("kernel").get<std::string>();
  c.bandwidth_c = j.at("bandwidth_c").get<double>();
  for (const auto& p : j.at("w_points")) {
    const auto x = p.at("x").get<std::vector<double>>();
    c.w_points.push_back({p.at("z").get<double>(), Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()))});
  }
  c.seed = j.at("seed").get<std::uint64_t>();
  c.a = j.at("a").get<double>();
  c.b = j.at("b").get<double>();
  if (j.contains("alt_ab") && !j.at("alt_ab").is_null()) {
    c.alt_ab = std::make_pair(j.at("alt_ab").at(0).get<double>(), j.at("alt_ab").at(1).get<double>());
  }
  const auto& o = j.at("optimizer");
  c.optimizer.n_starts = o.at("n_starts").get<int>();
  c.optimizer.max_iters = o.at("max_iters").get<int>();
  c.optimizer.grad_tol = o.at("grad_tol").get<double>();
  c.optimizer.step_tol = o.at("step_tol").get<double>();
  c.optimizer.box_radius = o.at("box_radius").get<double>();
  c.optimizer.seed = o.at("seed").get<std::uint64_t>();
  c.optimizer.refresh_every = o.at("refresh_every").get<int>();
  return c;
}

}  // namespace bqproc
