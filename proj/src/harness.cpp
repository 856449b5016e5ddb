#include "benign/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace benign {

using nlohmann::json;

ProblemInstance ProblemInstance_from(const InstanceSpec& spec) {
  ProblemInstance inst{CovarianceSpectrum::parse(spec.spectrum),
                       Vector(),
                       spec.n,
                       parse_feature_kind(spec.features),
                       NoiseModel{spec.sigma}};
  inst.theta_star = make_theta_star(spec.theta_star, inst.spectrum.dim());
  inst.validate();
  return inst;
}

ProblemInstance InstanceSpec::materialize() const {
  return ProblemInstance_from(*this);
}

WPolicy WPolicy::parse(const std::string& text) {
  WPolicy p;
  if (text == "zero") {
    p.kind = Kind::zero;
    return p;
  }
  if (text == "guess_exact") {
    p.kind = Kind::guess_exact;
    return p;
  }
  if (text.rfind("guess_noisy(", 0) == 0 && text.back() == ')') {
    p.kind = Kind::guess_noisy;
    try {
      p.noise_scale = std::stod(text.substr(12, text.size() - 13));
    } catch (const std::exception&) {
      throw config_error("w_policy: bad scale in '" + text + "'");
    }
    if (p.noise_scale < 0.0) throw config_error("w_policy: scale must be >= 0");
    return p;
  }
  if (text.rfind("explicit([", 0) == 0 && text.substr(text.size() - 2) == "])") {
    p.kind = Kind::explicit_vec;
    std::stringstream ss(text.substr(10, text.size() - 12));
    std::string item;
    while (std::getline(ss, item, ','))
      p.explicit_theta0.push_back(std::stod(item));
    if (p.explicit_theta0.empty())
      throw config_error("w_policy: empty explicit vector");
    return p;
  }
  throw config_error("w_policy: unknown policy '" + text + "'");
}

std::string WPolicy::name() const {
  switch (kind) {
    case Kind::zero: return "zero";
    case Kind::guess_exact: return "guess_exact";
    case Kind::guess_noisy: {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "guess_noisy(%.17g)", noise_scale);
      return buf;
    }
    case Kind::explicit_vec: {
      std::string s = "explicit([";
      char buf[40];
      for (size_t i = 0; i < explicit_theta0.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", explicit_theta0[i]);
        if (i) s += ",";
        s += buf;
      }
      return s + "])";
    }
  }
  return "?";
}

namespace {

void parse_instance(const json& j, InstanceSpec& spec) {
  if (j.contains("spectrum")) spec.spectrum = j.at("spectrum").get<std::string>();
  if (j.contains("theta_star"))
    spec.theta_star = j.at("theta_star").get<std::string>();
  if (j.contains("n")) spec.n = j.at("n").get<int>();
  if (j.contains("features")) spec.features = j.at("features").get<std::string>();
  if (j.contains("sigma")) spec.sigma = j.at("sigma").get<double>();
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("instance")) parse_instance(j.at("instance"), cfg.instance);
  if (j.contains("w_policy"))
    cfg.w_policy = WPolicy::parse(j.at("w_policy").get<std::string>());
  if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
  if (j.contains("master_seed"))
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  if (j.contains("b")) cfg.b = j.at("b").get<double>();
  if (j.contains("delta")) cfg.delta = j.at("delta").get<double>();
  if (j.contains("c")) cfg.c = j.at("c").get<double>();
  if (j.contains("tolerance_file"))
    cfg.tolerance_file = j.at("tolerance_file").get<std::string>();
  if (cfg.trials < 1) throw config_error("config: trials must be >= 1");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
    throw config_error("config: delta must lie in (0,1)");
  if (!(cfg.b > 0.0)) throw config_error("config: b must be positive");
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["instance"] = {{"spectrum", cfg.instance.spectrum},
                   {"theta_star", cfg.instance.theta_star},
                   {"n", cfg.instance.n},
                   {"features", cfg.instance.features},
                   {"sigma", cfg.instance.sigma}};
  j["w_policy"] = cfg.w_policy.name();
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  j["b"] = cfg.b;
  j["delta"] = cfg.delta;
  j["c"] = cfg.c;
  if (!cfg.tolerance_file.empty()) j["tolerance_file"] = cfg.tolerance_file;
  return j;
}

json parse_json_text(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw config_error(std::string(what) + ": invalid JSON: " + e.what());
  }
}

json load_json_file(const std::string& path, const char* what) {
  std::ifstream f(path);
  if (!f) throw config_error(std::string(what) + ": cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_json_text(ss.str(), what);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  return parse_config(parse_json_text(text, "config"));
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  return parse_config(load_json_file(path, "config"));
}

std::string ExperimentConfig::to_json() const {
  return config_to_json(*this).dump(2);
}

ResolvedPolicy resolve_w_policy(const ExperimentConfig& config) {
  ProblemInstance inst = config.instance.materialize();
  ResolvedPolicy rp;
  rp.w = Vector::Zero(inst.p());

  auto guess_theta0 = [&](const Vector& psi_hat) {
    CriticalIndex ci = critical_index(inst.spectrum, inst.n, config.b);
    const double s_k = tail_sum(inst.spectrum, ci.value());
    if (!(inst.noise.sigma > 0.0))
      throw config_error("w_policy: guess policies require sigma > 0");
    return init_for_guess(psi_hat, inst.noise.sigma, inst.n, s_k);
  };

  switch (config.w_policy.kind) {
    case WPolicy::Kind::zero:
      return rp;
    case WPolicy::Kind::guess_exact:
      if (inst.theta_star.norm() == 0.0)
        throw config_error("w_policy: guess_exact needs a nonzero theta_star");
      rp.theta0 = guess_theta0(inst.theta_star);
      break;
    case WPolicy::Kind::guess_noisy: {
      std::mt19937_64 gen(mix_seed(config.master_seed, 0x677565737373ULL));
      std::normal_distribution<double> normal(0.0, 1.0);
      Vector u(inst.p());
      for (int i = 0; i < inst.p(); ++i) u[i] = normal(gen);
      if (u.norm() > 0.0) u /= u.norm();
      Vector psi_hat = inst.theta_star + config.w_policy.noise_scale * u;
      if (psi_hat.norm() == 0.0)
        throw config_error("w_policy: noisy guess collapsed to zero");
      rp.theta0 = guess_theta0(psi_hat);
      break;
    }
    case WPolicy::Kind::explicit_vec: {
      if (static_cast<int>(config.w_policy.explicit_theta0.size()) != inst.p())
        throw config_error("w_policy: explicit theta(0) length does not match p");
      rp.theta0 = Eigen::Map<const Vector>(config.w_policy.explicit_theta0.data(),
                                           inst.p());
      if (rp.theta0.norm() == 0.0)
        throw config_error("w_policy: explicit theta(0) must be nonzero");
      break;
    }
  }
  rp.w = normalized_direction(rp.theta0);
  rp.w_is_zero = false;
  return rp;
}

namespace {

TrialResult run_trial_impl(const ExperimentConfig& config,
                           const ProblemInstance& inst,
                           const ResolvedPolicy& policy, int trial_index) {
  TrialResult r;
  r.seed = mix_seed(config.master_seed, static_cast<std::uint64_t>(trial_index));
  Dataset ds = sample_dataset(inst, r.seed);
  SvdFactors svd = svd_factors(ds.X);

  ImplicitBiasSolution sol = implicit_bias_estimate(svd, ds.y, policy.w);
  r.alpha_star = sol.alpha;
  r.risk_exact = excess_risk(sol.theta_hat, inst.theta_star, inst.spectrum);
  r.risk_ols = excess_risk(sol.theta_ols, inst.theta_star, inst.spectrum);
  r.trace_inv = svd.trace_gram_inverse();
  r.mu1 = svd.mu1();
  r.mun = svd.mun();
  r.report =
      empirical_risk_report(sol, inst.theta_star, inst.spectrum, svd, ds.eps,
                            policy.w);
  r.lower = lower_bound_terms(svd, inst.spectrum, inst.theta_star,
                              inst.noise.sigma);

  r.flags.anticoncentration = satisfies_anticoncentration(inst.features);
  CriticalIndex ci = critical_index(inst.spectrum, inst.n, config.b);
  r.flags.k_finite = ci.finite();
  if (ci.finite()) {
    const int k = *ci.k;
    const double s_k = tail_sum(inst.spectrum, k);
    r.flags.p_margin = inst.p() >= 4.0 * (inst.n + k);
    r.flags.n_margin = inst.n >= 4.0 * std::max<double>(k, s_k);
    // psi -> 0 as sigma -> 0, so the noiseless case uses the limit directly.
    Vector psi = (policy.w_is_zero || !(inst.noise.sigma > 0.0))
                     ? Vector(Vector::Zero(inst.p()))
                     : psi_from_init(policy.theta0, inst.noise.sigma, inst.n, s_k);
    r.bounds = bound_terms(inst.spectrum, inst.n, k, inst.theta_star, psi,
                           config.delta, config.c);
  } else {
    r.flags.p_margin = false;
    r.flags.n_margin = false;
  }
  return r;
}

}  // namespace

TrialResult run_trial(const ExperimentConfig& config, int trial_index) {
  ProblemInstance inst = config.instance.materialize();
  ResolvedPolicy policy = resolve_w_policy(config);
  try {
    return run_trial_impl(config, inst, policy, trial_index);
  } catch (const numeric_error& e) {
    throw numeric_error("trial " + std::to_string(trial_index) + ": " + e.what());
  }
}

SweepSpec SweepSpec::from_json_text(const std::string& text) {
  json j = parse_json_text(text, "sweep");
  SweepSpec spec;
  spec.axis = j.at("axis").get<std::string>();
  spec.values = j.at("values").get<std::vector<double>>();
  if (j.contains("base")) spec.base = parse_config(j.at("base"));
  if (spec.values.empty()) throw config_error("sweep: empty value list");
  if (!std::is_sorted(spec.values.begin(), spec.values.end(),
                      std::less_equal<>()) &&
      !std::is_sorted(spec.values.begin(), spec.values.end(),
                      std::greater_equal<>()))
    throw config_error("sweep: values must be strictly monotone");
  return spec;
}

SweepSpec SweepSpec::from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("sweep: cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json_text(ss.str());
}

namespace {

// Rewrites one argument of a preset call like spike(k,eps,p).
std::string patch_preset_arg(const std::string& preset, const std::string& name,
                             int arg_index, double value, bool integral) {
  auto open = preset.find('(');
  if (open == std::string::npos || preset.substr(0, open) != name)
    throw config_error("sweep: axis requires a " + name + "(...) spectrum, got '" +
                       preset + "'");
  std::string body = preset.substr(open + 1, preset.size() - open - 2);
  std::vector<std::string> args;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) args.push_back(item);
  if (arg_index >= static_cast<int>(args.size()))
    throw config_error("sweep: preset '" + preset + "' has too few arguments");
  char buf[40];
  if (integral)
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(value));
  else
    std::snprintf(buf, sizeof(buf), "%.17g", value);
  args[arg_index] = buf;
  std::string out = name + "(";
  for (size_t i = 0; i < args.size(); ++i) out += (i ? "," : "") + args[i];
  return out + ")";
}

int preset_p_arg_index(const std::string& preset) {
  if (preset.rfind("isotropic(", 0) == 0) return 0;
  if (preset.rfind("spike(", 0) == 0) return 2;
  if (preset.rfind("poly(", 0) == 0 || preset.rfind("exp(", 0) == 0) return 1;
  throw config_error("sweep: cannot vary p of spectrum '" + preset + "'");
}

std::string preset_name(const std::string& preset) {
  return preset.substr(0, preset.find('('));
}

}  // namespace

ExperimentConfig SweepSpec::config_at(double value) const {
  ExperimentConfig cfg = base;
  if (axis == "n") {
    cfg.instance.n = static_cast<int>(value);
    if (static_cast<double>(cfg.instance.n) != value)
      throw config_error("sweep: n values must be integers");
  } else if (axis == "sigma") {
    cfg.instance.sigma = value;
  } else if (axis == "b") {
    cfg.b = value;
  } else if (axis == "p") {
    cfg.instance.spectrum =
        patch_preset_arg(cfg.instance.spectrum, preset_name(cfg.instance.spectrum),
                         preset_p_arg_index(cfg.instance.spectrum), value, true);
  } else if (axis == "eps") {
    cfg.instance.spectrum =
        patch_preset_arg(cfg.instance.spectrum, "spike", 1, value, false);
  } else if (axis == "k") {
    cfg.instance.spectrum =
        patch_preset_arg(cfg.instance.spectrum, "spike", 0, value, true);
  } else {
    throw config_error("sweep: unknown axis '" + axis + "'");
  }
  return cfg;
}

const std::vector<std::string>& trial_metric_names() {
  static const std::vector<std::string> names = {
      "risk_exact", "risk_ols",    "alpha_star",  "trace_inv", "mu1",
      "mun",        "bias_term",   "cross_term",  "noise_term", "bias_ub",
      "bias_weak_ub", "variance_ub", "xi_ub",     "bias_lb",   "variance_lb"};
  return names;
}

std::vector<std::optional<double>> trial_metric_values(const TrialResult& r) {
  std::vector<std::optional<double>> v = {
      r.risk_exact,        r.risk_ols,          r.alpha_star,
      r.trace_inv,         r.mu1,               r.mun,
      r.report.bias_term,  r.report.cross_term, r.report.noise_term};
  if (r.bounds.has_value()) {
    v.push_back(r.bounds->bias);
    v.push_back(r.bounds->bias_weak);
    v.push_back(r.bounds->variance);
    v.push_back(r.bounds->xi);
  } else {
    v.insert(v.end(), 4, std::nullopt);
  }
  v.push_back(r.lower.bias_lb);
  v.push_back(r.lower.variance_lb);
  return v;
}

namespace {

double pairwise_sum(const std::vector<double>& v, size_t lo, size_t hi) {
  if (hi - lo == 1) return v[lo];
  size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

void append_mean_se(std::vector<std::optional<double>>& row,
                    const std::vector<std::optional<double>>& samples) {
  std::vector<double> present;
  present.reserve(samples.size());
  for (const auto& s : samples)
    if (s.has_value()) present.push_back(*s);
  if (present.empty()) {
    row.push_back(std::nullopt);
    row.push_back(std::nullopt);
    return;
  }
  const double mean = pairwise_sum(present, 0, present.size()) / present.size();
  double se = 0.0;
  if (present.size() > 1) {
    std::vector<double> sq(present.size());
    for (size_t i = 0; i < present.size(); ++i) {
      const double d = present[i] - mean;
      sq[i] = d * d;
    }
    se = std::sqrt(pairwise_sum(sq, 0, sq.size()) /
                   ((present.size() - 1.0) * present.size()));
  }
  row.push_back(mean);
  row.push_back(se);
}

}  // namespace

Table run_sweep(const SweepSpec& spec, int threads) {
  Table table;
  table.columns.push_back(spec.axis);
  for (const auto& name : trial_metric_names()) {
    table.columns.push_back(name + "_mean");
    table.columns.push_back(name + "_se");
  }
  table.columns.insert(table.columns.end(),
                       {"flag_anticoncentration", "flag_p_margin",
                        "flag_n_margin", "flag_k_finite", "trials"});

  for (double value : spec.values) {
    ExperimentConfig cfg = spec.config_at(value);
    ProblemInstance inst = cfg.instance.materialize();
    ResolvedPolicy policy = resolve_w_policy(cfg);
    std::vector<TrialResult> results(cfg.trials);
    try {
      parallel_for(cfg.trials, threads, [&](int t) {
        results[t] = run_trial_impl(cfg, inst, policy, t);
      });
    } catch (const numeric_error& e) {
      throw numeric_error("sweep at " + spec.axis + " = " +
                          std::to_string(value) + ": " + e.what());
    }

    std::vector<std::optional<double>> row;
    row.push_back(value);
    const size_t n_metrics = trial_metric_names().size();
    std::vector<std::vector<std::optional<double>>> metric_samples(n_metrics);
    for (const auto& r : results) {
      auto vals = trial_metric_values(r);
      for (size_t m = 0; m < n_metrics; ++m)
        metric_samples[m].push_back(vals[m]);
    }
    for (size_t m = 0; m < n_metrics; ++m) append_mean_se(row, metric_samples[m]);
    const TrialFlags& f = results.front().flags;
    row.push_back(f.anticoncentration ? 1.0 : 0.0);
    row.push_back(f.p_margin ? 1.0 : 0.0);
    row.push_back(f.n_margin ? 1.0 : 0.0);
    row.push_back(f.k_finite ? 1.0 : 0.0);
    row.push_back(static_cast<double>(cfg.trials));
    table.append_row(std::move(row));
  }
  return table;
}

Table run_trials_table(const ExperimentConfig& config, int threads) {
  ProblemInstance inst = config.instance.materialize();
  ResolvedPolicy policy = resolve_w_policy(config);
  std::vector<TrialResult> results(config.trials);
  parallel_for(config.trials, threads, [&](int t) {
    results[t] = run_trial_impl(config, inst, policy, t);
  });
  Table table;
  table.columns.push_back("trial");
  table.columns.insert(table.columns.end(), trial_metric_names().begin(),
                       trial_metric_names().end());
  for (int t = 0; t < config.trials; ++t) {
    std::vector<std::optional<double>> row;
    row.push_back(static_cast<double>(t));
    auto vals = trial_metric_values(results[t]);
    row.insert(row.end(), vals.begin(), vals.end());
    table.append_row(std::move(row));
  }
  return table;
}

}  // namespace benign
