#pragma once

// Smoothed maximum-score estimation: argmax over s in {-1, +1} and b in a box
// of the smoothed score, for one quantile level or a warm-started tau grid.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bqproc/csv.hpp"
#include "bqproc/dataset.hpp"
#include "bqproc/error.hpp"
#include "bqproc/kernels.hpp"
#include "bqproc/rng.hpp"
#include "bqproc/score.hpp"

namespace bqproc {

struct OptimizerConfig {
  int n_starts = 8;
  int max_iters = 200;
  double grad_tol = 1e-8;
  double step_tol = 1e-10;
  double box_radius = 10.0;
  std::uint64_t seed = 17;
  // Along a tau path, fresh uniform starts are added every refresh_every levels.
  int refresh_every = 1;

  void validate() const {
    if (n_starts < 1) throw ConfigError("optimizer: n_starts must be >= 1");
    if (max_iters < 1) throw ConfigError("optimizer: max_iters must be >= 1");
    if (!(grad_tol > 0.0) || !(step_tol > 0.0)) throw ConfigError("optimizer: tolerances must be > 0");
    if (!(box_radius > 0.0)) throw ConfigError("optimizer: box_radius must be > 0");
    if (refresh_every < 1) throw ConfigError("optimizer: refresh_every must be >= 1");
  }
};

enum class StartKind { warm, zero, surrogate, random };

inline std::string to_string(StartKind k) {
  switch (k) {
    case StartKind::warm: return "warm";
    case StartKind::zero: return "zero";
    case StartKind::surrogate: return "surrogate";
    case StartKind::random: return "random";
  }
  return "?";
}

struct StartRecord {
  StartKind kind = StartKind::zero;
  int index = 0;  // position within its kind (random draw number)
  int s = 1;
  Vector b_start;
  Vector b_end;
  double start_objective = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  bool box_hit = false;
};

struct BetaDiagnostics {
  bool converged = false;
  bool box_hit = false;
  bool polish_improved = false;
  StartKind winning_kind = StartKind::zero;
  int winning_index = 0;
  int evaluations = 0;
  double other_sign_objective = 0.0;
  std::vector<StartRecord> starts;

  std::string winning_start() const {
    return winning_kind == StartKind::random ? "random:" + std::to_string(winning_index)
                                             : to_string(winning_kind);
  }
};

struct BetaEstimate {
  int s_hat = 1;
  Vector b_hat;
  double objective = 0.0;
  BetaDiagnostics diagnostics;
};

struct BandwidthChoice {
  double h = 0.0;
  double condition_value = 0.0;  // (n h^3)^{-1/2} (log n)^2
  bool warning = false;
};

/// h = c n^{-1/(2k+1)}; flags a warning when (n h^3)^{-1/2} (log n)^2 > 1.
inline BandwidthChoice default_bandwidth(long long n, int k, double c = 1.0) {
  if (n < 2) throw ConfigError("default_bandwidth: n must be >= 2");
  if (k < 2) throw ConfigError("default_bandwidth: k must be >= 2");
  if (!(c > 0.0)) throw ConfigError("default_bandwidth: c must be > 0");
  BandwidthChoice out;
  const double nd = static_cast<double>(n);
  out.h = c * std::pow(nd, -1.0 / (2.0 * k + 1.0));
  const double logn = std::log(nd);
  out.condition_value = logn * logn / std::sqrt(nd * out.h * out.h * out.h);
  out.warning = out.condition_value > 1.0;
  return out;
}

namespace detail {

/// Logistic fit of y on (z, x); supplies a start b = c_x / |c_z| whose
/// intercept is shifted to the tau-crossing when x holds a constant column.
class LogisticSurrogate {
 public:
  explicit LogisticSurrogate(const Dataset& data) : d_(data.d()) {
    const Eigen::Index n = data.n();
    const Eigen::Index p = d_ + 1;
    Matrix W(n, p);
    W.col(0) = data.z;
    W.rightCols(d_) = data.x;
    for (Eigen::Index j = 0; j < d_; ++j) {
      if ((data.x.col(j).array() == 1.0).all()) {
        const_col_ = static_cast<int>(j);
        break;
      }
    }
    Vector beta = Vector::Zero(p);
    constexpr double kRidge = 1e-6;
    for (int it = 0; it < 50; ++it) {
      const Vector eta = W * beta;
      const Vector prob = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
      const Vector wts = (prob.array() * (1.0 - prob.array())).max(1e-10).matrix();
      Matrix H = W.transpose() * wts.asDiagonal() * W;
      H.diagonal().array() += kRidge;
      const Vector g = W.transpose() * (data.y - prob) - kRidge * beta;
      const Vector step = H.ldlt().solve(g);
      if (!step.allFinite()) break;
      beta += step;
      if (step.norm() < 1e-9 || beta.norm() > 1e3) break;
    }
    if (beta.allFinite() && std::abs(beta[0]) > 1e-8) {
      ok_ = true;
      cz_ = beta[0];
      cx_ = beta.tail(d_);
    }
  }

  /// Sign of the fitted z coefficient; 0 when the fit failed.
  int sign() const { return ok_ ? (cz_ > 0.0 ? 1 : -1) : 0; }

  Vector start(double tau) const {
    if (!ok_) return Vector::Zero(d_);
    Vector b = cx_;
    if (const_col_ >= 0) b[const_col_] += std::log(tau / (1.0 - tau));
    return b / std::abs(cz_);
  }

 private:
  Eigen::Index d_;
  bool ok_ = false;
  double cz_ = 0.0;
  Vector cx_;
  int const_col_ = -1;
};

class SignObjective {
 public:
  SignObjective(const Dataset& data, int s, double tau, double h, const KernelSpec& kernel)
      : data_(data), kernel_(kernel) {
    point_.s = s;
    point_.tau = tau;
    point_.h = h;
  }

  ScoreEval operator()(const Vector& b, ScoreOrder order) {
    ++evaluations;
    point_.b = b;
    return kernel_.visit(
        [&](const auto& k) { return evaluate_smoothed(data_, point_, k, order); });
  }

  double h() const { return point_.h; }
  int evaluations = 0;

 private:
  const Dataset& data_;
  const KernelSpec& kernel_;
  ScorePoint point_;
};

inline Vector clamp_box(const Vector& b, double r) { return b.cwiseMax(-r).cwiseMin(r); }

inline bool on_box(const Vector& b, double r) { return (b.array().abs() >= r).any(); }

struct LocalResult {
  Vector b;
  double value = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  bool certified = false;  // stopped on the gradient test at a negative definite Hessian
};

/// Projected ascent: Newton steps where the Hessian is negative definite,
/// scaled gradient steps elsewhere, Armijo backtracking on both.
inline LocalResult ascend(SignObjective& f, Vector b, const OptimizerConfig& cfg) {
  const double r = cfg.box_radius;
  b = clamp_box(b, r);
  ScoreEval cur = f(b, ScoreOrder::hessian);
  LocalResult out;
  double trust = 1.0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    out.iterations = it + 1;
    Vector pg = cur.gradient;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      if ((b[j] >= r && pg[j] > 0.0) || (b[j] <= -r && pg[j] < 0.0)) pg[j] = 0.0;
    }
    const double gnorm = pg.norm();
    if (gnorm < cfg.grad_tol) {
      out.converged = true;
      out.certified = Eigen::LLT<Matrix>(-cur.hessian).info() == Eigen::Success;
      break;
    }
    Vector dir;
    bool newton = false;
    Eigen::LLT<Matrix> llt(-cur.hessian);
    if (llt.info() == Eigen::Success) {
      dir = llt.solve(cur.gradient);
      newton = dir.allFinite() && dir.dot(cur.gradient) > 0.0;
    }
    if (!newton) dir = pg * (trust / gnorm);

    bool accepted = false;
    bool stalled = false;
    double t = 1.0;
    Vector bn;
    ScoreEval next;
    for (int ls = 0; ls < 40; ++ls) {
      bn = clamp_box(b + t * dir, r);
      if ((bn - b).norm() < cfg.step_tol) {
        stalled = true;
        break;
      }
      next = f(bn, ScoreOrder::hessian);
      if (next.value >= cur.value + 1e-4 * cur.gradient.dot(bn - b) && next.value >= cur.value) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      out.converged = stalled || t < 1e-10;
      break;
    }
    const double moved = (bn - b).norm();
    const double gain = next.value - cur.value;
    if (!newton) trust = std::min(std::max(2.0 * t * trust, 1e-8), 2.0 * r);
    b = bn;
    cur = std::move(next);
    if (moved < cfg.step_tol || (gain <= 1e-15 && !newton)) {
      out.converged = true;
      break;
    }
  }
  out.b = b;
  out.value = cur.value;
  return out;
}

/// Nelder-Mead started from a converged point; keeps the result only if it
/// strictly improves the objective.
inline LocalResult simplex_polish(SignObjective& f, const LocalResult& start,
                                  const OptimizerConfig& cfg) {
  const Eigen::Index d = start.b.size();
  const double r = cfg.box_radius;
  const double offset = std::max(0.05 * f.h(), 1e-6);
  std::vector<Vector> pts;
  std::vector<double> vals;
  pts.push_back(start.b);
  vals.push_back(start.value);
  for (Eigen::Index j = 0; j < d; ++j) {
    Vector p = start.b;
    p[j] += (p[j] + offset <= r) ? offset : -offset;
    pts.push_back(p);
    vals.push_back(f(p, ScoreOrder::value).value);
  }
  const int max_evals = 30 * static_cast<int>(d + 1);
  int evals = static_cast<int>(d);
  auto value_at = [&](const Vector& p) {
    ++evals;
    return f(p, ScoreOrder::value).value;
  };
  std::vector<std::size_t> order(pts.size());
  while (evals < max_evals) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] > vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];
    if (vals[best] - vals[worst] <= 1e-14 * (1.0 + std::abs(vals[best]))) break;
    Vector centroid = Vector::Zero(d);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += pts[order[i]];
    centroid /= static_cast<double>(d);
    const Vector refl = clamp_box(centroid + (centroid - pts[worst]), r);
    const double fr = value_at(refl);
    if (fr > vals[best]) {
      const Vector exp = clamp_box(centroid + 2.0 * (centroid - pts[worst]), r);
      const double fe = value_at(exp);
      if (fe > fr) {
        pts[worst] = exp;
        vals[worst] = fe;
      } else {
        pts[worst] = refl;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr > vals[second]) {
      pts[worst] = refl;
      vals[worst] = fr;
      continue;
    }
    const Vector con = centroid + 0.5 * (pts[worst] - centroid);
    const double fc = value_at(con);
    if (fc > vals[worst]) {
      pts[worst] = con;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = value_at(pts[i]);
    }
  }
  const auto it = std::max_element(vals.begin(), vals.end());
  LocalResult out = start;
  if (*it > start.value) {
    out.b = pts[static_cast<std::size_t>(it - vals.begin())];
    out.value = *it;
  }
  return out;
}

struct StartPoint {
  StartKind kind;
  int index;
  Vector b;
};

struct SignResult {
  LocalResult best;
  bool polish_improved = false;
  StartKind kind = StartKind::zero;
  int index = 0;
  bool any_converged = false;
  int evaluations = 0;
  std::vector<StartRecord> records;
};

inline SignResult maximize_sign(const Dataset& data, int s, double tau, double h,
                                const KernelSpec& kernel, const std::vector<StartPoint>& starts,
                                const OptimizerConfig& cfg) {
  SignObjective f(data, s, tau, h, kernel);
  SignResult res;
  bool have = false;
  for (const auto& st : starts) {
    StartRecord rec;
    rec.kind = st.kind;
    rec.index = st.index;
    rec.s = s;
    rec.b_start = clamp_box(st.b, cfg.box_radius);
    rec.start_objective = f(rec.b_start, ScoreOrder::value).value;
    LocalResult lr = ascend(f, rec.b_start, cfg);
    rec.b_end = lr.b;
    rec.objective = lr.value;
    rec.iterations = lr.iterations;
    rec.converged = lr.converged;
    rec.box_hit = on_box(lr.b, cfg.box_radius);
    res.any_converged = res.any_converged || lr.converged;
    // Strict improvement keeps the earliest start on ties.
    if (!have || lr.value > res.best.value) {
      res.best = lr;
      res.kind = st.kind;
      res.index = st.index;
      have = true;
    }
    res.records.push_back(std::move(rec));
  }
  res.evaluations = f.evaluations;
  return res;
}

/// Simplex polish of one sign's best point unless it is a certified local maximum.
inline void polish_sign(const Dataset& data, int s, double tau, double h, const KernelSpec& kernel,
                        SignResult& res, const OptimizerConfig& cfg) {
  if (res.best.certified) return;
  SignObjective f(data, s, tau, h, kernel);
  const LocalResult polished = simplex_polish(f, res.best, cfg);
  res.polish_improved = polished.value > res.best.value;
  res.best = polished;
  res.evaluations += f.evaluations;
}

inline std::vector<StartPoint> random_starts(const OptimizerConfig& cfg, Eigen::Index d, int count,
                                             std::uint64_t stream) {
  std::vector<StartPoint> out;
  const CounterRng rng(cfg.seed, stream);
  for (int k = 0; k < count; ++k) {
    Vector b(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      b[j] = cfg.box_radius * (2.0 * rng.uniform(static_cast<std::uint32_t>(k),
                                                  static_cast<std::uint32_t>(j)) -
                               1.0);
    }
    out.push_back({StartKind::random, k, std::move(b)});
  }
  return out;
}

inline void check_estimation_inputs(const Dataset& data, double tau, double h,
                                    const OptimizerConfig& cfg) {
  data.validate();
  cfg.validate();
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("tau must lie in (0,1)");
  if (!(h > 0.0)) throw DomainError("bandwidth h must be positive");
  if (data.n() < data.d() + 2) throw ConfigError("need n >= d + 2 observations");
  const double y0 = data.y[0];
  if ((data.y.array() == y0).all()) {
    throw DegenerateResponse("all responses equal " + std::to_string(static_cast<int>(y0)) +
                             "; the smoothed score has no interior maximizer");
  }
}

/// Combines the per-sign maxima; s = +1 wins unless s = -1 is better by
/// more than 1e-12. The leading sign is polished first, and the trailing one
/// too when it is within 1e-6 of the leader.
inline BetaEstimate combine_signs(const Dataset& data, double tau, double h, const KernelSpec& kernel,
                                  const OptimizerConfig& cfg, SignResult plus, SignResult minus) {
  const bool lead_minus = minus.best.value > plus.best.value + 1e-12;
  polish_sign(data, lead_minus ? -1 : 1, tau, h, kernel, lead_minus ? minus : plus, cfg);
  if ((lead_minus ? plus : minus).best.value >= (lead_minus ? minus : plus).best.value - 1e-6) {
    polish_sign(data, lead_minus ? 1 : -1, tau, h, kernel, lead_minus ? plus : minus, cfg);
  }
  const bool take_minus = minus.best.value > plus.best.value + 1e-12;
  SignResult& win = take_minus ? minus : plus;
  const SignResult& lose = take_minus ? plus : minus;
  if (!plus.any_converged && !minus.any_converged) {
    throw EstimationError("optimizer did not converge from any start at tau = " +
                          std::to_string(tau));
  }
  BetaEstimate est;
  est.s_hat = take_minus ? -1 : 1;
  est.b_hat = win.best.b;
  est.objective = win.best.value;
  auto& dg = est.diagnostics;
  dg.converged = win.any_converged;
  dg.polish_improved = win.polish_improved;
  dg.winning_kind = win.kind;
  dg.winning_index = win.index;
  dg.evaluations = plus.evaluations + minus.evaluations;
  dg.other_sign_objective = lose.best.value;
  dg.starts = std::move(plus.records);
  dg.starts.insert(dg.starts.end(), minus.records.begin(), minus.records.end());
  return est;
}

}  // namespace detail

/// Multi-start maximization of the smoothed score over s = +-1 and the
/// box |b_j| <= box_radius. Starts per sign: b = 0, the logistic surrogate,
/// and n_starts - 2 uniform draws in the box.
inline BetaEstimate estimate_beta(const Dataset& data, double tau, double h, const KernelSpec& kernel,
                                  const OptimizerConfig& cfg) {
  detail::check_estimation_inputs(data, tau, h, cfg);
  const detail::LogisticSurrogate surrogate(data);
  const Eigen::Index d = data.d();
  std::vector<detail::StartPoint> starts;
  starts.push_back({StartKind::zero, 0, Vector::Zero(d)});
  if (cfg.n_starts >= 2) starts.push_back({StartKind::surrogate, 0, surrogate.start(tau)});
  auto plus_starts = starts;
  auto minus_starts = starts;
  const int n_random = std::max(0, cfg.n_starts - 2);
  for (auto& p : detail::random_starts(cfg, d, n_random, mix_stream(0, 1))) plus_starts.push_back(p);
  for (auto& p : detail::random_starts(cfg, d, n_random, mix_stream(0, 2))) minus_starts.push_back(p);
  auto plus = detail::maximize_sign(data, 1, tau, h, kernel, plus_starts, cfg);
  auto minus = detail::maximize_sign(data, -1, tau, h, kernel, minus_starts, cfg);
  auto est = detail::combine_signs(data, tau, h, kernel, cfg, std::move(plus), std::move(minus));
  est.diagnostics.box_hit = detail::on_box(est.b_hat, cfg.box_radius);
  return est;
}

struct CoefficientPath {
  std::vector<double> taus;
  std::vector<int> s_hat;
  std::vector<Vector> b_hat;
  std::vector<double> objective;
  double h = 0.0;
  Eigen::Index n = 0;  // sample size behind the fit; 0 when unknown
  std::vector<BetaDiagnostics> diagnostics;

  std::size_t size() const { return taus.size(); }
  Eigen::Index d() const { return b_hat.empty() ? 0 : b_hat.front().size(); }
  bool converged(std::size_t i) const { return diagnostics.empty() || diagnostics[i].converged; }

  void push_back(double tau, const BetaEstimate& est) {
    taus.push_back(tau);
    s_hat.push_back(est.s_hat);
    b_hat.push_back(est.b_hat);
    objective.push_back(est.objective);
    diagnostics.push_back(est.diagnostics);
  }
};

inline void validate_tau_grid(const std::vector<double>& taus) {
  if (taus.empty()) throw ConfigError("tau grid is empty");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0 && taus[i] < 1.0)) throw ConfigError("tau grid must lie in (0,1)");
    if (i > 0 && !(taus[i] > taus[i - 1])) throw ConfigError("tau grid must be strictly increasing");
  }
}

/// First level cold (estimate_beta); each later level warm-starts each sign
/// from its previous maximizer (plus the tau-shifted surrogate for the sign
/// it points to), adding
/// max(1, n_starts / 4) fresh uniform draws every refresh_every levels.
inline CoefficientPath estimate_process(const Dataset& data, const std::vector<double>& taus,
                                        double h, const KernelSpec& kernel,
                                        const OptimizerConfig& cfg) {
  validate_tau_grid(taus);
  CoefficientPath path;
  path.h = h;
  path.n = data.n();
  const Eigen::Index d = data.d();
  std::vector<Vector> prev(2);  // per sign: [0] s=+1, [1] s=-1
  std::unique_ptr<detail::LogisticSurrogate> surrogate;
  for (std::size_t t = 0; t < taus.size(); ++t) {
    const double tau = taus[t];
    try {
      if (t == 0) {
        BetaEstimate est = estimate_beta(data, tau, h, kernel, cfg);
        surrogate = std::make_unique<detail::LogisticSurrogate>(data);
        for (int sign_idx = 0; sign_idx < 2; ++sign_idx) {
          const int s = sign_idx == 0 ? 1 : -1;
          if (s == est.s_hat) {
            prev[static_cast<std::size_t>(sign_idx)] = est.b_hat;
          } else {
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& rec : est.diagnostics.starts) {
              if (rec.s == s && rec.objective > best) {
                best = rec.objective;
                prev[static_cast<std::size_t>(sign_idx)] = rec.b_end;
              }
            }
          }
        }
        path.push_back(tau, est);
        continue;
      }
      detail::check_estimation_inputs(data, tau, h, cfg);
      const int n_random = t % static_cast<std::size_t>(cfg.refresh_every) == 0 ? std::max(1, cfg.n_starts / 4) : 0;
      detail::SignResult res[2];
      for (int sign_idx = 0; sign_idx < 2; ++sign_idx) {
        const int s = sign_idx == 0 ? 1 : -1;
        std::vector<detail::StartPoint> starts;
        starts.push_back({StartKind::warm, 0, prev[static_cast<std::size_t>(sign_idx)]});
        if (surrogate->sign() == s) starts.push_back({StartKind::surrogate, 0, surrogate->start(tau)});
        for (auto& p : detail::random_starts(cfg, d, n_random,
                                             mix_stream(t, static_cast<std::uint64_t>(sign_idx + 1)))) {
          starts.push_back(std::move(p));
        }
        res[sign_idx] = detail::maximize_sign(data, s, tau, h, kernel, starts, cfg);
        prev[static_cast<std::size_t>(sign_idx)] = res[sign_idx].best.b;
      }
      BetaEstimate est = detail::combine_signs(data, tau, h, kernel, cfg, std::move(res[0]), std::move(res[1]));
      est.diagnostics.box_hit = detail::on_box(est.b_hat, cfg.box_radius);
      path.push_back(tau, est);
    } catch (const DegenerateResponse&) {
      throw;
    } catch (const Error& e) {
      throw EstimationError("tau = " + csv::format_double(tau) + ": " + e.what());
    }
  }
  return path;
}

/// CSV `tau,s_hat,b_1,...,b_d,objective,converged`.
inline void write_path_csv(std::ostream& out, const CoefficientPath& path) {
  out << "tau,s_hat";
  for (Eigen::Index j = 0; j < path.d(); ++j) out << ",b_" << j + 1;
  out << ",objective,converged\n";
  for (std::size_t i = 0; i < path.size(); ++i) {
    out << csv::format_double(path.taus[i]) << ',' << path.s_hat[i];
    for (Eigen::Index j = 0; j < path.d(); ++j) out << ',' << csv::format_double(path.b_hat[i][j]);
    out << ',' << csv::format_double(path.objective[i]) << ',' << (path.converged(i) ? 1 : 0) << '\n';
  }
}

inline CoefficientPath read_path_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!csv::next_line(in, line, lineno)) throw ParseError(1, "missing header");
  const auto header = csv::split(line);
  if (header.size() < 5 || header[0] != "tau" || header[1] != "s_hat" ||
      header[header.size() - 2] != "objective" || header.back() != "converged") {
    throw ParseError(lineno, "header must be 'tau,s_hat,b_1,...,b_d,objective,converged'");
  }
  const std::size_t d = header.size() - 4;
  CoefficientPath path;
  while (csv::next_line(in, line, lineno)) {
    const auto f = csv::split(line);
    if (f.size() != d + 4) {
      throw ParseError(lineno, "expected " + std::to_string(d + 4) + " fields, found " +
                                   std::to_string(f.size()));
    }
    const double tau = csv::parse_finite(f[0], lineno, "tau");
    const double s = csv::parse_finite(f[1], lineno, "s_hat");
    if (s != 1.0 && s != -1.0) throw ParseError(lineno, "s_hat must be +1 or -1");
    Vector b(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) {
      b[static_cast<Eigen::Index>(j)] = csv::parse_finite(f[j + 2], lineno, header[j + 2]);
    }
    BetaDiagnostics diag;
    diag.converged = csv::parse_finite(f[d + 3], lineno, "converged") != 0.0;
    path.taus.push_back(tau);
    path.s_hat.push_back(static_cast<int>(s));
    path.b_hat.push_back(std::move(b));
    path.objective.push_back(csv::parse_finite(f[d + 2], lineno, "objective"));
    path.diagnostics.push_back(std::move(diag));
    if (path.taus.size() > 1 && !(tau > path.taus[path.taus.size() - 2])) {
      throw ParseError(lineno, "tau values must be strictly increasing");
    }
  }
  if (path.taus.empty()) throw ParseError(lineno, "no path rows");
  return path;
}

}  // namespace bqproc
