// Command-line driver: closed-form estimation, the gradient-descent
// cross-check, seeded sweeps with CSV/SVG output, and the acceptance
// property suite.

#include "benign/datagen.hpp"
#include "benign/estimator.hpp"
#include "benign/harness.hpp"
#include "benign/risk.hpp"
#include "benign/spectral.hpp"
#include "benign/table.hpp"
#include "benign/verify.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitTolerance = 4;

std::string default_out_dir() {
  const char* env = std::getenv("BENIGN_OUT");
  return env && *env ? env : ".";
}

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value, dotted keys
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  int threads = 1;
  bool dry_run = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool needs_config) {
  auto* opt = cmd->add_option("--config", flags.config_path,
                              "JSON experiment config");
  if (needs_config) opt->required();
  cmd->add_option("--set", flags.overrides,
                  "Override a config field, e.g. --set instance.n=200");
  cmd->add_option("--seed", flags.seed, "Master seed override");
  cmd->add_option("--trials", flags.trials, "Trial count override");
  cmd->add_option("--threads", flags.threads, "Worker threads for trials");
  cmd->add_flag("--dry-run", flags.dry_run, "Print the resolved config and exit");
}

nlohmann::json load_config_json(const CommonFlags& flags) {
  nlohmann::json j;
  if (!flags.config_path.empty()) {
    std::ifstream f(flags.config_path);
    if (!f)
      throw benign::config_error("cannot open config '" + flags.config_path + "'");
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw benign::config_error(std::string("config: invalid JSON: ") + e.what());
    }
  } else {
    j = nlohmann::json::object();
  }
  for (const auto& kv : flags.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw benign::config_error("--set expects key=value, got '" + kv + "'");
    std::string pointer = "/" + kv.substr(0, eq);
    for (auto& c : pointer)
      if (c == '.') c = '/';
    std::string value = kv.substr(eq + 1);
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(value);
    } catch (const nlohmann::json::exception&) {
      parsed = value;  // plain string
    }
    j[nlohmann::json::json_pointer(pointer)] = parsed;
  }
  return j;
}

benign::ExperimentConfig resolve_config(const CommonFlags& flags,
                                        const nlohmann::json* base = nullptr) {
  nlohmann::json j = base ? *base : load_config_json(flags);
  benign::ExperimentConfig cfg =
      benign::ExperimentConfig::from_json_text(j.dump());
  if (flags.seed) cfg.master_seed = *flags.seed;
  if (flags.trials) cfg.trials = *flags.trials;
  return cfg;
}

void print_solution_summary(const benign::ProblemInstance& inst,
                            const benign::Dataset& ds,
                            const benign::SvdFactors& svd,
                            const benign::ImplicitBiasSolution& sol,
                            const benign::Vector& w,
                            const benign::ExperimentConfig& cfg) {
  using benign::Vector;
  const double interp = (ds.X * sol.theta_hat - ds.y).norm() /
                        (ds.y.norm() > 0 ? ds.y.norm() : 1.0);
  std::printf("n = %d, p = %d, sigma = %g, features = %s\n", inst.n, inst.p(),
              inst.noise.sigma,
              benign::feature_kind_name(inst.features).c_str());
  std::printf("|theta_hat|            = %.12g\n", sol.theta_hat.norm());
  std::printf("|theta_ols|            = %.12g\n", sol.theta_ols.norm());
  std::printf("|perturbation|         = %.12g\n", sol.perturbation.norm());
  std::printf("alpha_star             = %.12g\n", sol.alpha);
  std::printf("interpolation residual = %.3e (relative)\n", interp);
  std::printf("stationarity residual  = %.3e\n",
              sol.stationarity_residual(svd, w));
  std::printf("excess risk            = %.12g\n",
              benign::excess_risk(sol.theta_hat, inst.theta_star, inst.spectrum));
  std::printf("excess risk (OLS)      = %.12g\n",
              benign::excess_risk(sol.theta_ols, inst.theta_star, inst.spectrum));

  benign::CriticalIndex ci =
      benign::critical_index(inst.spectrum, inst.n, cfg.b);
  if (ci.finite()) {
    const int k = *ci.k;
    const double s_k = benign::tail_sum(inst.spectrum, k);
    std::printf("critical index k = %d (b = %g), s_k = %.12g\n", k, cfg.b, s_k);
    if (inst.spectrum.dim() > k && cfg.instance.spectrum.rfind("spike(", 0) == 0) {
      // Corollary-style spike shorthand replaces s_k = eps (p - k) by eps p.
      const double eps_val = inst.spectrum.lambda(inst.spectrum.dim() - 1);
      std::printf("spike shorthand eps*p = %.12g (vs s_k = %.12g, ratio %.6g)\n",
                  eps_val * inst.p(), s_k, eps_val * inst.p() / s_k);
    }
  } else {
    std::printf("critical index k = infinite (b = %g): bound terms undefined\n",
                cfg.b);
  }
}

int cmd_estimate(const CommonFlags& flags, const std::string& dump_path,
                 const std::string& dump_dataset_path) {
  benign::ExperimentConfig cfg = resolve_config(flags);
  if (flags.dry_run) {
    std::printf("%s\n", cfg.to_json().c_str());
    return 0;
  }
  benign::ProblemInstance inst = cfg.instance.materialize();
  benign::ResolvedPolicy policy = benign::resolve_w_policy(cfg);
  benign::Dataset ds = benign::sample_dataset(inst, cfg.master_seed);
  benign::SvdFactors svd = benign::svd_factors(ds.X);
  benign::ImplicitBiasSolution sol =
      benign::implicit_bias_estimate(svd, ds.y, policy.w);
  print_solution_summary(inst, ds, svd, sol, policy.w, cfg);

  if (!dump_path.empty()) {
    benign::Table t;
    t.columns = {"coordinate", "theta_hat", "theta_ols", "perturbation"};
    for (int i = 0; i < inst.p(); ++i)
      t.append_row({static_cast<double>(i + 1), sol.theta_hat[i],
                    sol.theta_ols[i], sol.perturbation[i]});
    benign::emit_csv(t, dump_path);
    std::printf("wrote %s\n", dump_path.c_str());
  }
  if (!dump_dataset_path.empty()) {
    std::ofstream f(dump_dataset_path, std::ios::binary);
    if (!f)
      throw benign::config_error("cannot open '" + dump_dataset_path + "'");
    benign::write_dataset_csv(ds, f);
    std::printf("wrote %s\n", dump_dataset_path.c_str());
  }
  return 0;
}

int cmd_flow(const CommonFlags& flags, int m, double step, long max_iters,
             double tol) {
  benign::ExperimentConfig cfg = resolve_config(flags);
  if (flags.dry_run) {
    std::printf("%s\n", cfg.to_json().c_str());
    return 0;
  }
  benign::ProblemInstance inst = cfg.instance.materialize();
  benign::ResolvedPolicy policy = benign::resolve_w_policy(cfg);
  if (policy.w_is_zero)
    throw benign::config_error(
        "flow: w_policy=zero has no network to train; pick a nonzero policy");
  benign::Dataset ds = benign::sample_dataset(inst, cfg.master_seed);
  benign::SvdFactors svd = benign::svd_factors(ds.X);
  benign::ImplicitBiasSolution sol =
      benign::implicit_bias_estimate(svd, ds.y, policy.w);

  benign::TwoLayerNet net =
      benign::balanced_init(policy.theta0, m, benign::mix_seed(cfg.master_seed, 1));
  benign::GdOptions opts;
  opts.step = step;
  opts.max_iters = max_iters;
  opts.tol = tol;
  benign::GdResult gd = benign::train_gradient_descent(net, ds.X, ds.y, opts);

  const benign::Vector theta_gd = gd.net.predictor();
  std::printf("gradient descent: %ld iters, step %.3e, converged = %s\n",
              gd.trace.iters, gd.trace.step_used,
              gd.trace.converged ? "yes" : "no");
  std::printf("%-28s %-16s %-16s %s\n", "quantity", "closed form", "gd limit",
              "discrepancy");
  auto row = [&](const char* name, double a, double b) {
    std::printf("%-28s %-16.8g %-16.8g %.3e\n", name, a, b, std::abs(a - b));
  };
  row("|theta|", sol.theta_hat.norm(), theta_gd.norm());
  row("excess risk",
      benign::excess_risk(sol.theta_hat, inst.theta_star, inst.spectrum),
      benign::excess_risk(theta_gd, inst.theta_star, inst.spectrum));
  row("fit residual |X theta - y|", (ds.X * sol.theta_hat - ds.y).norm(),
      (ds.X * theta_gd - ds.y).norm());
  std::printf("%-28s %.3e (relative)\n", "|theta_gd - theta_hat|",
              (theta_gd - sol.theta_hat).norm() / sol.theta_hat.norm());
  std::printf("%-28s %.3e (max over run: %.3e of |a a^T|)\n",
              "balancedness residual", gd.trace.balance_residual,
              gd.trace.max_balance_ratio);
  return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& out_dir,
              bool plot, bool log_log) {
  nlohmann::json j = load_config_json(flags);
  benign::SweepSpec spec = benign::SweepSpec::from_json_text(j.dump());
  if (flags.seed) spec.base.master_seed = *flags.seed;
  if (flags.trials) spec.base.trials = *flags.trials;
  if (flags.dry_run) {
    std::printf("axis: %s\nvalues:", spec.axis.c_str());
    for (double v : spec.values) std::printf(" %g", v);
    std::printf("\nbase:\n%s\n", spec.base.to_json().c_str());
    return 0;
  }
  std::filesystem::create_directories(out_dir);
  benign::Table table = benign::run_sweep(spec, flags.threads);
  const std::string csv_path = out_dir + "/sweep_" + spec.axis + ".csv";
  benign::emit_csv(table, csv_path);
  std::printf("wrote %s (%zu rows)\n", csv_path.c_str(), table.rows.size());
  if (plot) {
    benign::PlotOptions popts;
    popts.log_x = popts.log_y = log_log;
    popts.title = "mean excess risk vs " + spec.axis;
    const std::string svg_path = out_dir + "/sweep_" + spec.axis + ".svg";
    benign::emit_plot(table, spec.axis, {"risk_exact_mean", "risk_ols_mean"},
                      svg_path, popts);
    std::printf("wrote %s\n", svg_path.c_str());
  }
  return 0;
}

int cmd_verify(const std::string& tolerance_path, const std::string& out_dir,
               std::vector<int> criteria, int threads) {
  benign::VerifyOptions opts;
  if (!tolerance_path.empty())
    opts.tol = benign::Tolerances::from_json_file(tolerance_path);
  opts.threads = threads;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    opts.out_dir = out_dir;
  }
  auto results = benign::run_acceptance(opts, std::move(criteria));
  bool all_pass = true;
  for (const auto& r : results) {
    std::printf("%s  %2d. %-55s [%5.1fs] %s\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.seconds, r.detail.c_str());
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : kExitTolerance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for interpolating two-layer linear "
               "networks"};
  app.require_subcommand(1);

  CommonFlags est_flags, flow_flags, sweep_flags;
  std::string dump_path, dump_dataset_path;
  auto* est = app.add_subcommand(
      "estimate", "closed-form estimate for one instance and seed");
  add_common(est, est_flags, true);
  est->add_option("--dump", dump_path, "write theta_hat/theta_ols as CSV");
  est->add_option("--dump-dataset", dump_dataset_path,
                  "write the sampled dataset as CSV");

  int flow_m = 30;
  double flow_step = 0.0, flow_tol = 1e-9;
  long flow_iters = 400000;
  auto* flow = app.add_subcommand(
      "flow", "gradient-descent vs closed-form cross-check");
  add_common(flow, flow_flags, true);
  flow->add_option("--m", flow_m, "hidden width");
  flow->add_option("--step", flow_step, "step size (0 = automatic)");
  flow->add_option("--max-iters", flow_iters, "iteration cap");
  flow->add_option("--tol", flow_tol, "relative fit tolerance");

  std::string sweep_out = default_out_dir();
  bool sweep_plot = false, sweep_loglog = false;
  auto* sweep = app.add_subcommand("sweep", "axis sweep to CSV (and SVG)");
  add_common(sweep, sweep_flags, true);
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_flag("--plot", sweep_plot, "emit an SVG line chart");
  sweep->add_flag("--log-log", sweep_loglog, "logarithmic axes for the plot");

  std::string verify_tol, verify_out;
  std::vector<int> verify_criteria;
  int verify_threads = 1;
  auto* verify = app.add_subcommand(
      "verify", "run the acceptance property suite against the tolerance file");
  verify->add_option("--tolerances", verify_tol, "tolerance JSON file");
  verify->add_option("--out", verify_out, "emit per-experiment stat CSVs here");
  verify->add_option("--criteria", verify_criteria,
                     "subset of criteria to run (1-10)");
  verify->add_option("--threads", verify_threads, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (est->parsed())
      return cmd_estimate(est_flags, dump_path, dump_dataset_path);
    if (flow->parsed())
      return cmd_flow(flow_flags, flow_m, flow_step, flow_iters, flow_tol);
    if (sweep->parsed())
      return cmd_sweep(sweep_flags, sweep_out, sweep_plot, sweep_loglog);
    if (verify->parsed())
      return cmd_verify(verify_tol, verify_out, verify_criteria, verify_threads);
  } catch (const benign::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const benign::numeric_error& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
