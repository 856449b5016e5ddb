#pragma once

#include "benign/common.hpp"
#include "benign/datagen.hpp"
#include "benign/estimator.hpp"
#include "benign/spectrum.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace benign {

/// Head/tail split of the Gram matrix: A = X X^T, H from the k largest-
/// variance whitened columns, T from the rest, with A = H + T.
struct GramDecomposition {
  Matrix A;
  Matrix H;
  Matrix T;
};

GramDecomposition gram_head_tail(const Dataset& ds,
                                 const CovarianceSpectrum& spec, int k);

struct ConcentrationStat {
  double observed = 0;
  double predicted = 0;
  double relative_deviation = 0;  // (observed - predicted) / predicted
  long n_trials = 0;
  double std_error = 0;  // standard error of the observed mean
};

// Hypothesis-margin checks of the concentration lemmas, operationalized as
// p >= p_margin (n + k) and n >= n_margin max{k, s_k}. Violations are
// reported, not fatal.
struct MarginFlags {
  bool p_ok = true;
  bool n_ok = true;
  bool norms_ok = true;
};

struct ConcentrationOptions {
  double b = 10.0;        // critical-index threshold constant
  double p_margin = 4.0;  // p >= p_margin * (n + k)
  double n_margin = 4.0;  // n >= n_margin * max{k, s_k}
  int threads = 1;
};

// Tr((X X^T)^{-1}) through the singular values.
double trace_gram_inverse(const Matrix& X);

// Summarizes per-trial samples against a prediction; the mean and standard
// error are reduced pairwise in trial order, independent of scheduling.
ConcentrationStat summarize_samples(const std::vector<double>& samples,
                                    double predicted);

// Per-trial Tr((X X^T)^{-1}) draws (trial t uses mix_seed(master_seed, t)).
std::vector<double> trace_inverse_samples(const ProblemInstance& instance,
                                          int trials, std::uint64_t master_seed,
                                          int threads = 1);

// Mean of Tr((X X^T)^{-1}) over seeded trials against the prediction n / s_k.
// Refuses to run when the tail is too thin (p < p_margin * (n + k)).
ConcentrationStat trace_inverse_stat(const ProblemInstance& instance, int k,
                                     int trials, std::uint64_t master_seed,
                                     const ConcentrationOptions& opts = {});

// Extreme eigenvalues mu_1 and mu_n of X_S X_S^T against the prediction s(S)
// for both. Requires |S| >= n so that mu_n is not structurally zero.
std::pair<ConcentrationStat, ConcentrationStat> eigen_range_stat(
    const ProblemInstance& instance, const std::vector<int>& S, int trials,
    std::uint64_t master_seed, const ConcentrationOptions& opts = {});

// Empirical lower-tail CDF of mu_n(X_S X_S^T) / s(S) on a grid of t in (0,1):
// for each t, the frequency of trials with mu_n <= t * s(S). The observed
// decay as t shrinks is the artifact's evidence for the multiplicative tail.
struct TailProbRow {
  double t = 0;
  long count = 0;
  long trials = 0;
  double frequency = 0;
};

std::vector<TailProbRow> smallest_eig_tail_prob(
    const ProblemInstance& instance, const std::vector<int>& S,
    const std::vector<double>& t_grid, int trials, std::uint64_t master_seed,
    const ConcentrationOptions& opts = {});

// Per-realization |D^dagger U^T eps|^2 against sigma^2 Tr((X X^T)^{-1}).
ConcentrationStat noise_projection_stat(const Dataset& ds,
                                        const SvdFactors& svd, double sigma);

struct AlphaConcentration {
  ConcentrationStat stat;   // observed = trial mean of alpha_star
  MarginFlags flags;
  int k = 0;
  double s_k = 0;
  std::vector<std::string> warnings;
};

// Per-trial alpha_star draws for a fixed initialization direction w.
std::vector<double> alpha_star_samples(const ProblemInstance& instance,
                                       const Vector& w, int trials,
                                       std::uint64_t master_seed,
                                       int threads = 1);

// Trial mean of alpha_star for a fixed initialization direction w against the
// prediction 2 sqrt(sigma) n^{1/4} / (3 s_k^{1/4}). Hypothesis violations are
// returned as warnings.
AlphaConcentration alpha_concentration_stat(const ProblemInstance& instance,
                                            const Vector& w, int trials,
                                            std::uint64_t master_seed,
                                            const ConcentrationOptions& opts = {});

}  // namespace benign
