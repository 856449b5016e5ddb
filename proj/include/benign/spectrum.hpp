#pragma once

#include "benign/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace benign {

/// Descending positive eigenvalues of the diagonal feature covariance.
///
/// Construction sorts unsorted input into descending order (and remembers
/// that it had to) instead of rejecting it; nonpositive entries are rejected.
class CovarianceSpectrum {
 public:
  explicit CovarianceSpectrum(std::vector<double> lambdas);

  static CovarianceSpectrum isotropic(int p);
  // k unit eigenvalues followed by p-k eigenvalues equal to eps.
  static CovarianceSpectrum spike(int k, double eps, int p);
  // lambda_i = i^{-a}, i = 1..p
  static CovarianceSpectrum poly(double a, int p);
  // lambda_i = gamma^i, i = 1..p, 0 < gamma < 1
  static CovarianceSpectrum exp_decay(double gamma, int p);

  // Accepts "isotropic(p)", "spike(k,eps,p)", "poly(a,p)", "exp(gamma,p)"
  // and "explicit([l1,l2,...])".
  static CovarianceSpectrum parse(const std::string& preset);

  int dim() const { return static_cast<int>(lambdas_.size()); }
  double lambda(int i) const { return lambdas_[i]; }  // 0-based
  const Vector& lambdas() const { return lambdas_; }
  double total_mass() const;

  bool input_was_unsorted() const { return input_was_unsorted_; }

  // JSON array of descending positive numbers.
  std::string to_json() const;

 private:
  Vector lambdas_;
  bool input_was_unsorted_ = false;
};

// Tail summaries at split index j: s_j is the variance mass beyond the first
// j eigenvalues, r_j = s_j / lambda_{j+1} and R_j = s_j^2 / sum_{i>j} lambda_i^2.
struct EffectiveRankReport {
  int j = 0;
  double s = 0;
  double r = 0;
  double R = 0;
};

// Smallest j with r_j >= b*n; absent when no j < p reaches the threshold
// (the minimum over an empty set).
struct CriticalIndex {
  std::optional<int> k;
  double b = 0;

  bool finite() const { return k.has_value(); }
  int value() const;  // throws config_error when infinite
};

// Sum of the p-j smallest eigenvalues, accumulated from the smallest upward.
double tail_sum(const CovarianceSpectrum& spec, int j);

EffectiveRankReport effective_ranks(const CovarianceSpectrum& spec, int j);

// Ranks of an arbitrary nonempty index subset (0-based indices into the
// spectrum): s(S), r(S) = s(S)/max lambda, R(S) = s(S)^2 / sum lambda_i^2.
EffectiveRankReport subset_ranks(const CovarianceSpectrum& spec,
                                 const std::vector<int>& S);

CriticalIndex critical_index(const CovarianceSpectrum& spec, int n, double b);

// w = theta0 / sqrt(|theta0|); the one place this normalization lives.
Vector normalized_direction(const Vector& theta0);

// psi = (2 sqrt(sigma) n^{1/4} / (3 s_k^{1/4})) * theta0 / sqrt(|theta0|)
Vector psi_from_init(const Vector& theta0, double sigma, int n, double s_k);

// Inverse of psi_from_init: the initialization whose rescaling equals the
// guess, theta0 = (9/4) psi_hat |psi_hat| sqrt(s_k / (sigma^2 n)).
Vector init_for_guess(const Vector& psi_hat, double sigma, int n, double s_k);

}  // namespace benign
