#include "benign/risk.hpp"

#include <cmath>

namespace benign {

double excess_risk(const Vector& theta, const Vector& theta_star,
                   const CovarianceSpectrum& spec) {
  if (theta.size() != theta_star.size() || theta.size() != spec.dim())
    throw config_error("excess_risk: dimension mismatch");
  double risk = 0.0;
  for (int i = spec.dim() - 1; i >= 0; --i) {
    const double d = theta[i] - theta_star[i];
    risk += spec.lambda(i) * d * d;
  }
  return risk;
}

BoundTerms bound_terms(const CovarianceSpectrum& spec, int n, int k,
                       const Vector& theta_star, const Vector& psi,
                       double delta, double c) {
  const int p = spec.dim();
  if (theta_star.size() != p || psi.size() != p)
    throw config_error("bound_terms: dimension mismatch");
  if (k < 0 || k >= p) throw config_error("bound_terms: k out of range");
  if (!(delta > 0.0 && delta < 1.0))
    throw config_error("bound_terms: delta must lie in (0,1)");
  if (n < 1) throw config_error("bound_terms: n must be >= 1");

  const double s_k = tail_sum(spec, k);
  const EffectiveRankReport tail = effective_ranks(spec, k);
  const EffectiveRankReport head0 = effective_ranks(spec, 0);
  const double log_inv_delta = std::log(1.0 / delta);
  const double q = s_k / n;

  double head = 0.0, tail_w = 0.0, total_sq = 0.0;
  for (int i = p - 1; i >= 0; --i) {
    const double e = theta_star[i] - psi[i];
    total_sq += e * e;
    if (i < k)
      head += e * e / spec.lambda(i);
    else
      tail_w += spec.lambda(i) * e * e;
  }

  BoundTerms bt;
  bt.delta = delta;
  bt.c = c;
  bt.bias = c * (head * q * q + tail_w);
  bt.bias_weak = 2.0 * c * total_sq * q;
  bt.variance = c * log_inv_delta *
                (static_cast<double>(k) / n + static_cast<double>(n) / tail.R);

  const double lambda1 = spec.lambda(0);
  const double psi_sq = psi.squaredNorm();
  const double bracket = n / tail.R + (n / tail.r) * (n / tail.r) + q +
                         log_inv_delta / n +
                         (static_cast<double>(k) / n) * (static_cast<double>(k) / n);
  const double fluct = std::max({std::sqrt(head0.r / n), head0.r / n,
                                 std::sqrt(log_inv_delta / n)});
  bt.xi = c * lambda1 * psi_sq * bracket * fluct;
  return bt;
}

BoundTerms spike_bound_terms(int k, double eps, int p, int n,
                             const Vector& theta_star, const Vector& psi,
                             double delta, double c) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw config_error("spike_bound_terms: need 0 < eps <= 1");
  if (k < 0 || k >= p) throw config_error("spike_bound_terms: need 0 <= k < p");
  if (theta_star.size() != p || psi.size() != p)
    throw config_error("spike_bound_terms: dimension mismatch");
  if (!(delta > 0.0 && delta < 1.0))
    throw config_error("spike_bound_terms: delta must lie in (0,1)");
  if (n < 1) throw config_error("spike_bound_terms: n must be >= 1");

  const double log_inv_delta = std::log(1.0 / delta);
  const double q = eps * p / n;  // s_k replaced by eps*p, as the corollary does

  double head_sq = 0.0, tail_sq = 0.0;
  for (int i = p - 1; i >= 0; --i) {
    const double e = theta_star[i] - psi[i];
    (i < k ? head_sq : tail_sq) += e * e;
  }

  BoundTerms bt;
  bt.delta = delta;
  bt.c = c;
  bt.bias = c * (head_sq * q * q + eps * tail_sq);
  bt.bias_weak = c * (head_sq + tail_sq) * q;
  bt.variance = c * log_inv_delta *
                (static_cast<double>(k) / n + static_cast<double>(n) / p);

  const double psi_sq = psi.squaredNorm();
  const double bracket = static_cast<double>(n) / p + q + log_inv_delta / n +
                         (static_cast<double>(k) / n) * (static_cast<double>(k) / n);
  const double fluct = std::max(std::sqrt((k + eps * p) / n),
                                std::sqrt(log_inv_delta / n));
  bt.xi = c * psi_sq * bracket * fluct;  // lambda_1 = 1 in the spike model
  return bt;
}

LowerBoundReport lower_bound_terms(const SvdFactors& svd,
                                   const CovarianceSpectrum& spec,
                                   const Vector& theta_star, double sigma) {
  if (spec.dim() != svd.p() || theta_star.size() != svd.p())
    throw config_error("lower_bound_terms: dimension mismatch");
  LowerBoundReport rep;
  Vector proj = svd.nullspace_project(theta_star);
  rep.bias_lb = proj.cwiseProduct(spec.lambdas().cwiseProduct(proj)).sum();
  // Tr(C) = |Sigma^{1/2} V D^{-1}|_F^2
  double tr_c = 0.0;
  for (int j = 0; j < svd.n(); ++j) {
    const double inv_d = 1.0 / svd.d[j];
    tr_c += inv_d * inv_d *
            svd.V.col(j).cwiseProduct(spec.lambdas().cwiseSqrt()).squaredNorm();
  }
  rep.variance_lb = sigma * sigma * tr_c;
  return rep;
}

LowerBoundReport lower_bound_terms(const Matrix& X,
                                   const CovarianceSpectrum& spec,
                                   const Vector& theta_star, double sigma) {
  return lower_bound_terms(svd_factors(X), spec, theta_star, sigma);
}

RiskReport empirical_risk_report(const ImplicitBiasSolution& sol,
                                 const Vector& theta_star,
                                 const CovarianceSpectrum& spec,
                                 const SvdFactors& svd, const Vector& eps,
                                 const Vector& w) {
  RiskReport rep;
  rep.risk_exact = excess_risk(sol.theta_hat, theta_star, spec);

  Vector e = svd.nullspace_project(theta_star - sol.alpha * w);
  Vector q = svd.V * svd.pinv_apply(eps);  // X^T (X X^T)^{-1} eps
  const Vector& lambdas = spec.lambdas();
  rep.bias_term = e.cwiseProduct(lambdas.cwiseProduct(e)).sum();
  rep.noise_term = q.cwiseProduct(lambdas.cwiseProduct(q)).sum();
  rep.cross_term = -2.0 * e.cwiseProduct(lambdas.cwiseProduct(q)).sum();
  return rep;
}

}  // namespace benign
