#pragma once

#include "benign/common.hpp"
#include "benign/datagen.hpp"
#include "benign/risk.hpp"
#include "benign/spectral.hpp"
#include "benign/table.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace benign {

/// Symbolic instance description. Presets rather than materialized objects so
/// a sweep can re-derive the instance when an axis (n, p, eps, k, sigma)
/// changes.
struct InstanceSpec {
  std::string spectrum = "isotropic(200)";
  std::string theta_star = "e1";
  int n = 50;
  std::string features = "gaussian";
  double sigma = 1.0;

  ProblemInstance materialize() const;
};

// How the initialization direction is chosen:
//   zero              w = 0 (the estimator collapses to min-norm OLS)
//   guess_exact       psi = theta_star via init_for_guess
//   guess_noisy(s)    psi = theta_star + s * (unit gaussian perturbation)
//   explicit([...])   theta(0) given literally
struct WPolicy {
  enum class Kind { zero, guess_exact, guess_noisy, explicit_vec } kind = Kind::zero;
  double noise_scale = 0.0;
  std::vector<double> explicit_theta0;

  static WPolicy parse(const std::string& text);
  std::string name() const;
};

struct ExperimentConfig {
  InstanceSpec instance;
  WPolicy w_policy;
  int trials = 1;
  std::uint64_t master_seed = 1;
  double b = 10.0;      // critical-index threshold constant
  double delta = 0.05;  // confidence parameter for bound reporting
  double c = 1.0;       // stand-in for the paper-style absolute constant
  std::string tolerance_file;

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
  std::string to_json() const;
};

/// The concrete initialization shared by every trial of one config. theta0 of
/// size zero encodes w = 0.
struct ResolvedPolicy {
  Vector theta0;
  Vector w;  // theta0 / sqrt(|theta0|), or zero vector
  bool w_is_zero = true;
};

// Resolves the policy once per config; guess policies need a finite critical
// index (they depend on s_k) and refuse to substitute p for an infinite k.
ResolvedPolicy resolve_w_policy(const ExperimentConfig& config);

struct TrialFlags {
  bool anticoncentration = true;
  bool p_margin = true;  // p >= 4 (n + k)
  bool n_margin = true;  // n >= 4 max{k, s_k}
  bool k_finite = true;
};

struct TrialResult {
  std::uint64_t seed = 0;
  double risk_exact = 0;
  double risk_ols = 0;
  double alpha_star = 0;
  double trace_inv = 0;
  double mu1 = 0;
  double mun = 0;
  RiskReport report;
  std::optional<BoundTerms> bounds;  // absent when the critical index is infinite
  LowerBoundReport lower;
  TrialFlags flags;
};

// Pure function of (config, trial_index): samples the dataset at the derived
// seed, runs the closed-form estimator and every per-realization diagnostic.
TrialResult run_trial(const ExperimentConfig& config, int trial_index);

struct SweepSpec {
  std::string axis;  // one of n, p, eps, k, b, sigma
  std::vector<double> values;
  ExperimentConfig base;

  static SweepSpec from_json_text(const std::string& text);
  static SweepSpec from_json_file(const std::string& path);
  ExperimentConfig config_at(double value) const;
};

// Stable column order of the per-trial numeric fields.
const std::vector<std::string>& trial_metric_names();
std::vector<std::optional<double>> trial_metric_values(const TrialResult& r);

// One aggregated row per axis value: mean and standard error of every trial
// metric, plus the margin flags. Parallel execution is deterministic: trials
// land in preallocated slots and are reduced pairwise in index order.
Table run_sweep(const SweepSpec& spec, int threads = 1);

// Per-trial table for a single config (one row per trial).
Table run_trials_table(const ExperimentConfig& config, int threads = 1);

}  // namespace benign
