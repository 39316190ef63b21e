#pragma once

// `bqproc` command line: simulate, fit, process, choiceprob, mc,
// validate-kernel. Exit status 0 on success, 1 on configuration or input
// errors, 2 on runtime and numeric failures.
//
// `--config FILE` reads an INI file; keys of the section named after the
// subcommand stand for long flags (`n = 2000` is `--n 2000`). Flags given on
// the command line take precedence over the file.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include "CLI11.hpp"
#include "json.hpp"

#include "bqproc/bqproc.hpp"

#ifndef BQPROC_VERSION
#define BQPROC_VERSION "0.0.0"
#endif

namespace bqproc::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kRuntimeError = 2 };

namespace detail {

inline std::vector<double> parse_reals(const std::string& text, const std::string& what) {
  try {
    return csv::parse_list(text, what);
  } catch (const ParseError&) {
    throw ConfigError(what + ": cannot parse '" + text + "' as a comma-separated list of reals");
  }
}

/// "lo:hi:m" for an equally spaced grid, otherwise an explicit comma list.
inline std::vector<double> parse_taus(const std::string& text) {
  if (text.find(':') != std::string::npos) {
    const auto parts = csv::split(text, ':');
    if (parts.size() != 3) throw ConfigError("taus: expected lo:hi:m, got '" + text + "'");
    const double lo = detail::parse_reals(std::string(parts[0]), "taus")[0];
    const double hi = detail::parse_reals(std::string(parts[1]), "taus")[0];
    const double m = detail::parse_reals(std::string(parts[2]), "taus")[0];
    if (m < 1 || m != std::floor(m)) throw ConfigError("taus: point count must be a positive integer");
    auto g = tau_grid(lo, hi, static_cast<int>(m));
    validate_tau_grid(g);
    return g;
  }
  auto g = parse_reals(text, "taus");
  validate_tau_grid(g);
  return g;
}

/// `z,x1,...,xd`; several points separated by ';'.
inline std::vector<CovariatePoint> parse_w_points(const std::string& text) {
  std::vector<CovariatePoint> out;
  for (auto part : csv::split(text, ';')) {
    if (csv::trim(part).empty()) continue;
    const auto v = parse_reals(std::string(part), "w");
    if (v.size() < 2) throw ConfigError("w: need z followed by at least one x entry");
    CovariatePoint w;
    w.z = v[0];
    w.x = Eigen::Map<const Vector>(v.data() + 1, static_cast<Eigen::Index>(v.size() - 1));
    out.push_back(std::move(w));
  }
  if (out.empty()) throw ConfigError("w: no covariate point given");
  return out;
}

inline std::vector<long long> parse_sizes(const std::string& text) {
  std::vector<long long> out;
  for (double v : parse_reals(text, "n-values")) {
    if (v < 1 || v != std::floor(v)) throw ConfigError("n-values: sizes must be positive integers");
    out.push_back(static_cast<long long>(v));
  }
  if (out.empty()) throw ConfigError("n-values: empty list");
  return out;
}

inline boost::property_tree::ptree read_ini(const std::string& path) {
  boost::property_tree::ptree tree;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError(e.line(), path + ": " + e.message());
  }
  return tree;
}

/// DGP by name (`ref`) or from an INI file with keys gamma, lambda, error,
/// x_intervals (`lo:hi` per non-constant covariate, comma separated), z_lo, z_hi.
inline DGPSpec load_dgp(const std::string& spec) {
  if (spec == "ref" || spec == "reference") return reference_dgp();
  const auto tree = read_ini(spec);
  DGPSpec d;
  d.name = tree.get<std::string>("name", spec);
  try {
    const auto g = parse_reals(tree.get<std::string>("gamma"), "dgp gamma");
    d.gamma = Eigen::Map<const Vector>(g.data(), static_cast<Eigen::Index>(g.size()));
    d.lambda = tree.get<double>("lambda", 0.0);
    d.error = parse_error_dist(tree.get<std::string>("error", "logistic"));
    for (auto iv : csv::split(tree.get<std::string>("x_intervals", ""))) {
      if (csv::trim(iv).empty()) continue;
      const auto lohi = csv::split(iv, ':');
      if (lohi.size() != 2) throw ConfigError("dgp x_intervals: expected lo:hi, got '" + std::string(iv) + "'");
      d.x_intervals.emplace_back(parse_reals(std::string(lohi[0]), "x_intervals")[0],
                                 parse_reals(std::string(lohi[1]), "x_intervals")[0]);
    }
    d.z_lo = tree.get<double>("z_lo", -4.0);
    d.z_hi = tree.get<double>("z_hi", 4.0);
  } catch (const boost::property_tree::ptree_error& e) {
    throw ConfigError("dgp file '" + spec + "': " + e.what());
  }
  d.validate();
  return d;
}

/// Appends `--key=value` for every key of the subcommand's config section
/// whose flag is absent from the command line.
inline std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::size_t sub = 0;
  while (sub < args.size() && args[sub].rfind('-', 0) == 0) ++sub;
  if (sub == args.size()) return args;
  std::optional<std::string> path;
  for (std::size_t i = sub + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;
  const auto tree = read_ini(*path);
  const auto section = tree.get_child_optional(args[sub]);
  if (!section) return args;
  for (const auto& [key, node] : *section) {
    std::string flag = "--" + key;
    std::replace(flag.begin() + 2, flag.end(), '_', '-');
    bool given = false;
    for (std::size_t i = sub + 1; i < args.size(); ++i) {
      if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) given = true;
    }
    if (!given) args.push_back(flag + "=" + node.data());
  }
  return args;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write output file '" + path + "'");
  return out;
}

inline std::string default_manifest(const std::string& out) { return out + ".manifest.json"; }

inline void write_manifest(const std::string& path, const std::string& subcommand, const CLI::App& sub,
                           nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json j;
  j["tool"] = "bqproc";
  j["version"] = BQPROC_VERSION;
  j["subcommand"] = subcommand;
  nlohmann::json opts = nlohmann::json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
    const std::string name = opt->get_lnames().front();
    if (opt->count() > 0) {
      opts[name] = opt->as<std::string>();
    } else if (!opt->get_default_str().empty()) {
      opts[name] = opt->get_default_str();
    }
  }
  j["options"] = opts;
  for (auto& [k, v] : extra.items()) j[k] = v;
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

struct FitOptions {
  std::string kernel = "gauss2";
  std::string h = "auto";
  double bandwidth_c = 1.0;
  OptimizerConfig optimizer;
};

inline void add_fit_options(CLI::App* sub, FitOptions& o) {
  sub->add_option("--kernel", o.kernel, "Kernel: gauss2 or gauss4");
  sub->add_option("--h,--bandwidth", o.h, "Bandwidth h, or auto for c n^(-1/(2k+1))");
  sub->add_option("--bandwidth-c", o.bandwidth_c, "Constant c of the default bandwidth")->check(CLI::PositiveNumber);
  sub->add_option("--starts,--n-starts", o.optimizer.n_starts, "Starts per sign")->check(CLI::PositiveNumber);
  sub->add_option("--max-iters", o.optimizer.max_iters, "Ascent iterations per start")->check(CLI::PositiveNumber);
  sub->add_option("--box", o.optimizer.box_radius, "Search box |b_j| <= box")->check(CLI::PositiveNumber);
  sub->add_option("--refresh-every", o.optimizer.refresh_every, "Fresh random starts every this many tau levels")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", o.optimizer.seed, "Seed for random starts")->envname("BQPROC_SEED");
}

inline double resolve_bandwidth(const FitOptions& o, const KernelSpec& k, Eigen::Index n) {
  if (o.h != "auto") {
    const double h = parse_reals(o.h, "h").at(0);
    if (!(h > 0.0)) throw ConfigError("h must be positive or auto");
    return h;
  }
  const auto bw = default_bandwidth(n, k.order(), o.bandwidth_c);
  if (bw.warning) {
    std::cerr << "warning: (n h^3)^(-1/2) (log n)^2 = " << csv::format_double(bw.condition_value)
              << " > 1 for the default bandwidth h = " << csv::format_double(bw.h) << '\n';
  }
  return bw.h;
}

inline void print_report(std::ostream& out, const ValidationReport& r) {
  out << "quantity,value,target,abs_error\n";
  out << "integral," << csv::format_double(r.integral) << ",1," << csv::format_double(std::abs(r.integral - 1.0))
      << '\n';
  for (std::size_t j = 0; j < r.moments.size(); ++j) {
    out << "moment_" << j + 1 << ',' << csv::format_double(r.moments[j]) << ",0,"
        << csv::format_double(std::abs(r.moments[j])) << '\n';
  }
  out << "moment_" << r.order << ',' << csv::format_double(r.kth_moment) << ",,\n";
  out << "abs_moment_" << r.order << ',' << csv::format_double(r.abs_kth_moment) << ",,\n";
  for (const auto& t : r.tail_decay) {
    out << "tail_scaled_sup_" << csv::format_double(t.x) << ',' << csv::format_double(t.scaled_sup) << ",,\n";
  }
  out << "max_quadrature_error," << csv::format_double(r.max_quadrature_error) << ",,\n";
  out << "pass," << (r.pass ? 1 : 0) << ",1,\n";
}

inline void append_rate_rows(std::ostream& out, const RateReport& rep) {
  auto emit = [&](const RateFit& f) {
    out << "rate_exponent_" << f.label << ",,,,," << csv::format_double(f.exponent) << '\n';
    for (std::size_t i = 0; i < f.factors.size(); ++i) {
      out << "rate_factor_" << f.label << ",,,," << i << ',' << csv::format_double(f.factors[i]) << '\n';
      out << "rate_theoretical_factor_" << f.label << ",,,," << i << ','
          << csv::format_double(f.theoretical_factors[i]) << '\n';
    }
  };
  for (const auto& f : rep.coefficient) emit(f);
  for (const auto& f : rep.choice) emit(f);
  if (!rep.choice.empty()) emit(rep.choice_pooled);
}

}  // namespace detail

/// Parses and dispatches; returns the process exit status.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Smoothed maximum-score quantile processes and choice probabilities", "bqproc"};
  app.option_defaults()->always_capture_default();
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(BQPROC_VERSION));

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw a dataset from a DGP");
  std::string config_path;
  std::string sim_dgp = "ref", sim_out;
  long long sim_n = 0;
  std::uint64_t sim_seed = 17, sim_rep = 0;
  sim->add_option("--config", config_path, "INI file; flags override its values");
  sim->add_option("--dgp", sim_dgp, "DGP: ref or a DGP INI file");
  sim->add_option("--n", sim_n, "Sample size")->required()->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Seed (falls back to BQPROC_SEED)")->envname("BQPROC_SEED");
  sim->add_option("--replication", sim_rep, "Replication stream id");
  sim->add_option("--out", sim_out, "Output CSV y,z,x1..xd")->required();
  std::string sim_manifest;
  sim->add_option("--manifest-out", sim_manifest, "Manifest path (default <out>.manifest.json)");

  // fit
  auto* fit = app.add_subcommand("fit", "Estimate beta at one quantile level");
  std::string fit_data, fit_out;
  double fit_tau = 0.5;
  detail::FitOptions fit_opts;
  fit->add_option("--config", config_path, "INI file; flags override its values");
  fit->add_option("--data", fit_data, "Input CSV y,z,x1..xd")->required();
  fit->add_option("--tau", fit_tau, "Quantile level in (0,1)")->check(CLI::Range(0.0, 1.0));
  detail::add_fit_options(fit, fit_opts);
  fit->add_option("--out", fit_out, "Output CSV tau,s_hat,b_1..b_d,objective,converged (default stdout)");
  std::string fit_manifest;
  fit->add_option("--manifest-out", fit_manifest, "Manifest path (default <out>.manifest.json)");

  // process
  auto* proc = app.add_subcommand("process", "Estimate the coefficient path over a tau grid");
  std::string proc_data, proc_out, proc_taus = "0.25:0.75:201";
  detail::FitOptions proc_opts;
  proc->add_option("--config", config_path, "INI file; flags override its values");
  proc->add_option("--data", proc_data, "Input CSV y,z,x1..xd")->required();
  proc->add_option("--taus,--tau-grid", proc_taus, "Grid lo:hi:m or comma list");
  detail::add_fit_options(proc, proc_opts);
  proc->add_option("--out", proc_out, "Output path CSV")->required();
  std::string proc_manifest;
  proc->add_option("--manifest-out", proc_manifest, "Manifest path (default <out>.manifest.json)");

  // choiceprob
  auto* cp = app.add_subcommand("choiceprob", "Choice probabilities from a coefficient path");
  std::string cp_path, cp_w, cp_out, cp_se = "none", cp_data, cp_dgp = "ref", cp_kernel = "gauss2";
  double cp_a = 0.25, cp_b = 0.75;
  std::string cp_h = "auto";
  long long cp_n = 0;
  cp->add_option("--config", config_path, "INI file; flags override its values");
  cp->add_option("--path", cp_path, "Path CSV from `process`")->required();
  cp->add_option("--w", cp_w, "Covariate point z,x1,..,xd; several separated by ';'")->required();
  cp->add_option("--a", cp_a, "Lower tau endpoint");
  cp->add_option("--b", cp_b, "Upper tau endpoint");
  cp->add_option("--se", cp_se, "Standard error: none, oracle or data")
      ->check(CLI::IsMember({"none", "oracle", "data"}));
  cp->add_option("--data", cp_data, "Data CSV for --se data");
  cp->add_option("--dgp", cp_dgp, "DGP for --se oracle");
  cp->add_option("--n", cp_n, "Sample size behind the path (oracle se)");
  cp->add_option("--h,--bandwidth", cp_h, "Bandwidth used for the path, or auto (default for n)");
  cp->add_option("--kernel", cp_kernel, "Kernel used for the path");
  cp->add_option("--out", cp_out, "Output CSV (default stdout)");
  std::string cp_manifest;
  cp->add_option("--manifest-out", cp_manifest, "Manifest path (default <out>.manifest.json)");

  // mc
  auto* mc = app.add_subcommand("mc", "Monte Carlo experiment with oracle summaries");
  std::string mc_dgp = "ref", mc_n = "1000", mc_taus = "0.25:0.75:201", mc_w, mc_kernel = "gauss2";
  std::string mc_out, mc_choice_out, mc_summary, mc_manifest_in, mc_manifest_out;
  int mc_reps = 100, mc_workers = 1;
  double mc_c = 1.0, mc_a = 0.25, mc_b = 0.75, mc_alt_a = 0.0, mc_alt_b = 0.0;
  std::uint64_t mc_seed = 17;
  OptimizerConfig mc_opt;
  mc->add_option("--config", config_path, "INI file; flags override its values");
  mc->add_option("--manifest", mc_manifest_in, "Re-run the experiment recorded in a manifest");
  mc->add_option("--dgp", mc_dgp, "DGP: ref or a DGP INI file");
  mc->add_option("--n-values", mc_n, "Comma list of sample sizes");
  mc->add_option("--taus,--tau-grid", mc_taus, "Grid lo:hi:m or comma list");
  mc->add_option("--reps", mc_reps, "Replications")->check(CLI::Range(2, 1000000));
  mc->add_option("--kernel", mc_kernel, "Kernel: gauss2 or gauss4");
  mc->add_option("--bandwidth-c", mc_c, "Constant c in h = c n^(-1/(2k+1))")->check(CLI::PositiveNumber);
  mc->add_option("--w", mc_w, "Covariate points z,x1,..,xd separated by ';'");
  mc->add_option("--a", mc_a, "Lower tau endpoint");
  mc->add_option("--b", mc_b, "Upper tau endpoint");
  mc->add_option("--alt-a", mc_alt_a, "Alternative lower endpoint (0: none)");
  mc->add_option("--alt-b", mc_alt_b, "Alternative upper endpoint (0: none)");
  mc->add_option("--seed", mc_seed, "Experiment seed")->envname("BQPROC_SEED");
  mc->add_option("--starts,--n-starts", mc_opt.n_starts, "Starts per sign")->check(CLI::PositiveNumber);
  mc->add_option("--box", mc_opt.box_radius, "Search box |b_j| <= box")->check(CLI::PositiveNumber);
  mc->add_option("--refresh-every", mc_opt.refresh_every, "Fresh random starts every this many tau levels")
      ->check(CLI::PositiveNumber);
  mc->add_option("--workers", mc_workers, "Worker threads")->check(CLI::PositiveNumber);
  mc->add_option("--out", mc_out, "Coefficient rows CSV")->required();
  mc->add_option("--choice-out", mc_choice_out, "Choice-probability rows CSV (default <out>.choice.csv)");
  mc->add_option("--summary", mc_summary, "Summary CSV");
  mc->add_option("--manifest-out", mc_manifest_out, "Manifest path (default <out>.manifest.json)");

  // validate-kernel
  auto* vk = app.add_subcommand("validate-kernel", "Check kernel moment conditions by quadrature");
  std::string vk_kernel, vk_out;
  double vk_tol = 1e-8;
  vk->add_option("--config", config_path, "INI file; flags override its values");
  vk->add_option("--kernel", vk_kernel, "Kernel: gauss2 or gauss4")->required();
  vk->add_option("--tol", vk_tol, "Moment tolerance")->check(CLI::PositiveNumber);
  vk->add_option("--out", vk_out, "Report CSV (default stdout)");

  std::vector<std::string> args;
  try {
    args = detail::apply_config(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  std::vector<const char*> cargs{argv[0]};
  for (const auto& s : args) cargs.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (sim->parsed()) {
      const DGPSpec dgp = detail::load_dgp(sim_dgp);
      const Dataset data = simulate(dgp, sim_n, sim_seed, sim_rep);
      auto f = detail::open_output(sim_out);
      write_dataset_csv(f, data);
      detail::write_manifest(sim_manifest.empty() ? detail::default_manifest(sim_out) : sim_manifest, "simulate",
                             *sim, {{"dgp", to_json(dgp)}, {"seed", sim_seed}});
      return kOk;
    }
    if (fit->parsed()) {
      const Dataset data = read_dataset_csv(fit_data);
      const KernelSpec k = builtin_kernel(fit_opts.kernel);
      const double h = detail::resolve_bandwidth(fit_opts, k, data.n());
      const BetaEstimate est = estimate_beta(data, fit_tau, h, k, fit_opts.optimizer);
      CoefficientPath path;
      path.h = h;
      path.n = data.n();
      path.push_back(fit_tau, est);
      if (fit_out.empty()) {
        write_path_csv(out, path);
      } else {
        auto f = detail::open_output(fit_out);
        write_path_csv(f, path);
        detail::write_manifest(fit_manifest.empty() ? detail::default_manifest(fit_out) : fit_manifest, "fit",
                               *fit,
                               {{"h", h}, {"winning_start", est.diagnostics.winning_start()},
                                {"box_hit", est.diagnostics.box_hit}, {"evaluations", est.diagnostics.evaluations}});
      }
      err << "s_hat=" << est.s_hat << " objective=" << csv::format_double(est.objective)
          << " start=" << est.diagnostics.winning_start() << (est.diagnostics.box_hit ? " box_hit" : "") << '\n';
      return kOk;
    }
    if (proc->parsed()) {
      const Dataset data = read_dataset_csv(proc_data);
      const KernelSpec k = builtin_kernel(proc_opts.kernel);
      const auto taus = detail::parse_taus(proc_taus);
      const double h = detail::resolve_bandwidth(proc_opts, k, data.n());
      const CoefficientPath path = estimate_process(data, taus, h, k, proc_opts.optimizer);
      auto f = detail::open_output(proc_out);
      write_path_csv(f, path);
      int box_hits = 0;
      for (const auto& d : path.diagnostics) box_hits += d.box_hit ? 1 : 0;
      detail::write_manifest(proc_manifest.empty() ? detail::default_manifest(proc_out) : proc_manifest,
                             "process", *proc, {{"h", h}, {"n", data.n()}, {"box_hits", box_hits}});
      return kOk;
    }
    if (cp->parsed()) {
      std::ifstream pin(cp_path);
      if (!pin) throw ConfigError("cannot open path file '" + cp_path + "'");
      CoefficientPath path = read_path_csv(pin);
      const auto ws = detail::parse_w_points(cp_w);
      const KernelSpec k = builtin_kernel(cp_kernel);
      std::optional<Dataset> data;
      std::optional<DGPSpec> dgp;
      if (cp_se == "data") {
        if (cp_data.empty()) throw ConfigError("--se data requires --data");
        data = read_dataset_csv(cp_data);
        path.n = data->n();
      } else if (cp_se == "oracle") {
        dgp = detail::load_dgp(cp_dgp);
        if (cp_n < 1) throw ConfigError("--se oracle requires --n");
        path.n = static_cast<Eigen::Index>(cp_n);
      }
      if (cp_se != "none") {
        detail::FitOptions bw;
        bw.h = cp_h;
        path.h = detail::resolve_bandwidth(bw, k, path.n);
      }
      std::ostringstream buf;
      buf << "z";
      for (Eigen::Index j = 0; j < path.d(); ++j) buf << ",x" << j + 1;
      buf << ",p_hat,tau_w_hat,se_hat,n_sign_changes\n";
      for (const auto& w : ws) {
        auto est = choice_prob(path, w, cp_a, cp_b);
        if (data) est.se_hat = choice_prob_se(path, est, *data, k);
        if (dgp) est.se_hat = choice_prob_se(path, est, *dgp, k);
        buf << csv::format_double(w.z);
        for (Eigen::Index j = 0; j < w.x.size(); ++j) buf << ',' << csv::format_double(w.x[j]);
        buf << ',' << csv::format_double(est.p_hat) << ',' << csv::format_double(est.tau_w_hat) << ','
            << (est.se_hat ? csv::format_double(*est.se_hat) : "nan") << ',' << est.n_sign_changes << '\n';
        if (est.n_sign_changes == 0) {
          err << "note: no sign change of w'beta over [a, b] at w #" << (&w - ws.data())
              << "; p_hat is a boundary value\n";
        }
      }
      if (cp_out.empty()) {
        out << buf.str();
      } else {
        auto f = detail::open_output(cp_out);
        f << buf.str();
        detail::write_manifest(cp_manifest.empty() ? detail::default_manifest(cp_out) : cp_manifest, "choiceprob",
                               *cp);
      }
      return kOk;
    }
    if (mc->parsed()) {
      ExperimentConfig cfg;
      if (!mc_manifest_in.empty()) {
        std::ifstream min(mc_manifest_in);
        if (!min) throw ConfigError("cannot open manifest '" + mc_manifest_in + "'");
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(min);
          cfg = experiment_from_json(j.contains("experiment") ? j.at("experiment") : j);
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError("manifest '" + mc_manifest_in + "': " + e.what());
        }
      } else {
        cfg.dgp = detail::load_dgp(mc_dgp);
        cfg.n_values = detail::parse_sizes(mc_n);
        cfg.taus = detail::parse_taus(mc_taus);
        cfg.n_reps = mc_reps;
        cfg.kernel = mc_kernel;
        cfg.bandwidth_c = mc_c;
        if (!mc_w.empty()) cfg.w_points = detail::parse_w_points(mc_w);
        cfg.seed = mc_seed;
        cfg.a = mc_a;
        cfg.b = mc_b;
        if (mc_alt_a > 0.0 || mc_alt_b > 0.0) cfg.alt_ab = std::make_pair(mc_alt_a, mc_alt_b);
        cfg.optimizer = mc_opt;
      }
      cfg.validate();
      const ExperimentResults res = run_experiment(cfg, mc_workers);
      {
        auto f = detail::open_output(mc_out);
        write_results_csv(f, res, cfg.dgp.d());
      }
      {
        auto f = detail::open_output(mc_choice_out.empty() ? mc_out + ".choice.csv" : mc_choice_out);
        write_choice_csv(f, res);
      }
      if (!mc_summary.empty()) {
        const McSummary s = summarize(res, cfg);
        auto f = detail::open_output(mc_summary);
        write_summary_csv(f, s);
        if (cfg.n_values.size() >= 2) detail::append_rate_rows(f, rate_check(s, cfg));
      }
      detail::write_manifest(mc_manifest_out.empty() ? detail::default_manifest(mc_out) : mc_manifest_out, "mc",
                             *mc,
                             {{"experiment", to_json(cfg)},
                              {"failed_replications", res.failed_replications},
                              {"total_replications", res.total_replications}});
      if (res.failed_replications > 0) {
        err << "note: " << res.failed_replications << " of " << res.total_replications
            << " replications failed and are flagged in the results\n";
      }
      return kOk;
    }
    if (vk->parsed()) {
      const KernelSpec k = builtin_kernel(vk_kernel);
      const ValidationReport r = validate_moments(k, vk_tol);
      if (vk_out.empty()) {
        detail::print_report(out, r);
      } else {
        auto f = detail::open_output(vk_out);
        detail::print_report(f, r);
      }
      for (const auto& msg : r.failures) err << "fail: " << msg << '\n';
      return r.pass ? kOk : kRuntimeError;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kConfigError;
}

}  // namespace bqproc::cli
