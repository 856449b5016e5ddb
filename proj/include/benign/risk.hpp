#pragma once

#include "benign/common.hpp"
#include "benign/estimator.hpp"
#include "benign/spectrum.hpp"

namespace benign {

// (theta - theta_star)^T Sigma (theta - theta_star); exact for diagonal Sigma.
double excess_risk(const Vector& theta, const Vector& theta_star,
                   const CovarianceSpectrum& spec);

/// Upper-bound terms of the excess-risk decomposition, evaluated with a
/// stand-in constant c (the paper's absolute constants are unspecified; only
/// scaling is meaningful).
struct BoundTerms {
  double bias = 0;       // c (|(t-psi)_{1:k}|^2_{Sigma^{-1}} (s_k/n)^2 + |(t-psi)_{k+1:p}|^2_{Sigma})
  double bias_weak = 0;  // 2 c |t - psi|^2 s_k / n
  double variance = 0;   // c log(1/delta) (k/n + n/R_k)
  double xi = 0;         // c lambda_1 |psi|^2 [...] max{...}
  double delta = 0;
  double c = 1;
};

BoundTerms bound_terms(const CovarianceSpectrum& spec, int n, int k,
                       const Vector& theta_star, const Vector& psi,
                       double delta, double c = 1.0);

// Spike-model instantiation: the displayed forms with s_k replaced by eps*p.
BoundTerms spike_bound_terms(int k, double eps, int p, int n,
                             const Vector& theta_star, const Vector& psi,
                             double delta, double c = 1.0);

/// Lower-bound quadratic forms for one realization of X:
///   B = (I - X^T (X X^T)^{-1} X) Sigma (I - X^T (X X^T)^{-1} X)
///   C = (X X^T)^{-1} X Sigma X^T (X X^T)^{-1}
/// Expectations over X are taken by the harness across seeds.
struct LowerBoundReport {
  double bias_lb = 0;      // theta_star^T B theta_star
  double variance_lb = 0;  // sigma^2 Tr(C)
};

LowerBoundReport lower_bound_terms(const SvdFactors& svd,
                                   const CovarianceSpectrum& spec,
                                   const Vector& theta_star, double sigma);
LowerBoundReport lower_bound_terms(const Matrix& X,
                                   const CovarianceSpectrum& spec,
                                   const Vector& theta_star, double sigma);

/// Exact three-term expansion of the excess risk of theta_hat:
///   risk = (t* - a w)^T B (t* - a w) + cross + eps^T C eps,
/// where cross = -2 (t* - a w)^T M eps and M = (I - X^T(XX^T)^{-1}X) Sigma
/// X^T (XX^T)^{-1}. The signed sum reproduces excess_risk(theta_hat) exactly
/// up to rounding.
struct RiskReport {
  double risk_exact = 0;
  double bias_term = 0;
  double cross_term = 0;
  double noise_term = 0;
};

RiskReport empirical_risk_report(const ImplicitBiasSolution& sol,
                                 const Vector& theta_star,
                                 const CovarianceSpectrum& spec,
                                 const SvdFactors& svd, const Vector& eps,
                                 const Vector& w);

}  // namespace benign
