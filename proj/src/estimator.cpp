#include "benign/estimator.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <random>

namespace benign {

Vector SvdFactors::pinv_apply(const Vector& v) const {
  return (U.transpose() * v).cwiseQuotient(d);
}

Vector SvdFactors::nullspace_project(const Vector& w) const {
  return w - V * (V.transpose() * w);
}

double SvdFactors::trace_gram_inverse() const {
  double t = 0.0;
  for (int i = n() - 1; i >= 0; --i) t += 1.0 / (d[i] * d[i]);
  return t;
}

SvdFactors svd_factors(const Matrix& X) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (p <= n) throw config_error("svd_factors: requires p > n");
  Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors f;
  f.U = svd.matrixU();
  f.d = svd.singularValues();
  f.V = svd.matrixV();
  if (!(f.d[n - 1] > 1e-8 * f.d[0]) || !(f.d[0] > 0.0))
    throw numeric_error("svd_factors: X is rank deficient (full-rank "
                        "precondition violated)");
  return f;
}

TransformedData transformed_data(const SvdFactors& svd, const Vector& y,
                                 const Vector& w) {
  if (y.size() != svd.n() || w.size() != svd.p())
    throw config_error("transformed_data: dimension mismatch");
  TransformedData td;
  td.y_tilde_head = svd.pinv_apply(y);
  td.y_tilde_norm = td.y_tilde_head.norm();
  td.w_tilde_head = svd.V.transpose() * w;
  td.w_perp = w - svd.V * td.w_tilde_head;
  // |w_perp| and the Pythagorean complement agree to rounding; the direct
  // norm is the stabler of the two when w is nearly in the row span.
  td.w_tail_norm = td.w_perp.norm();
  return td;
}

double alpha_star(double y_tilde_norm, double w_tail_norm) {
  const double zeta = w_tail_norm * w_tail_norm;
  const double rho = y_tilde_norm * y_tilde_norm;
  return std::sqrt(
      (8.0 * zeta + std::sqrt(64.0 * zeta * zeta + 1296.0 * rho)) / 81.0);
}

ImplicitBiasSolution implicit_bias_estimate(const SvdFactors& svd,
                                            const Vector& y, const Vector& w) {
  TransformedData td = transformed_data(svd, y, w);
  ImplicitBiasSolution sol;
  sol.theta_ols = svd.V * td.y_tilde_head;
  sol.alpha = alpha_star(td.y_tilde_norm, td.w_tail_norm);
  sol.perturbation = sol.alpha * td.w_perp;
  sol.theta_hat = sol.theta_ols + sol.perturbation;
  return sol;
}

ImplicitBiasSolution implicit_bias_estimate(const Matrix& X, const Vector& y,
                                            const Vector& w) {
  return implicit_bias_estimate(svd_factors(X), y, w);
}

double ImplicitBiasSolution::stationarity_residual(const SvdFactors& svd,
                                                   const Vector& w) const {
  const double nrm = theta_hat.norm();
  if (nrm < 1e-12) return 0.0;
  Vector grad = 1.5 / std::sqrt(nrm) * theta_hat - w;
  return svd.nullspace_project(grad).norm();
}

Vector min_norm_ols(const SvdFactors& svd, const Vector& y) {
  return svd.V * svd.pinv_apply(y);
}

Vector min_norm_ols(const Matrix& X, const Vector& y) {
  return min_norm_ols(svd_factors(X), y);
}

double TwoLayerNet::balance_residual() const {
  return (a * a.transpose() - W * W.transpose()).norm();
}

TwoLayerNet balanced_init(const Vector& theta0, int m, std::uint64_t seed) {
  const double nrm = theta0.norm();
  if (nrm == 0.0) throw config_error("balanced_init: zero theta0");
  if (m < 1) throw config_error("balanced_init: m must be >= 1");
  std::mt19937_64 gen(mix_seed(seed, 0x62616c616e636564ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector u(m);
  do {
    for (int i = 0; i < m; ++i) u[i] = normal(gen);
  } while (u.norm() == 0.0);
  u /= u.norm();
  TwoLayerNet net;
  net.a = std::sqrt(nrm) * u;
  net.W = u * (theta0.transpose() / std::sqrt(nrm));
  return net;
}

namespace {

double default_step(const TwoLayerNet& net, const Matrix& X) {
  Eigen::BDCSVD<Matrix> svd(X);
  const double mu1 = svd.singularValues()[0] * svd.singularValues()[0];
  Eigen::BDCSVD<Matrix> wsvd(net.W);
  const double wop = wsvd.singularValues()[0];
  const double scale = net.a.squaredNorm() + wop * wop;
  if (mu1 <= 0.0 || scale <= 0.0)
    throw config_error("train_gradient_descent: degenerate step scale");
  return 0.1 / (mu1 * scale);
}

}  // namespace

GdResult train_gradient_descent(const TwoLayerNet& init, const Matrix& X,
                                const Vector& y, const GdOptions& opts) {
  if (init.W.cols() != X.cols() || init.a.size() != init.W.rows() ||
      y.size() != X.rows())
    throw config_error("train_gradient_descent: dimension mismatch");
  if (opts.step < 0.0 || opts.tol < 0.0)
    throw config_error("train_gradient_descent: bad options");

  const double y_norm = y.norm();
  const double stop_residual = opts.tol * (y_norm > 0.0 ? y_norm : 1.0);
  double step = opts.step > 0.0 ? opts.step : default_step(init, X);

  GdResult out;
  for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
    TwoLayerNet net = init;
    GdTrace trace;
    trace.step_used = step;
    trace.restarts = attempt;

    Vector r = X * net.predictor() - y;
    const double initial_loss = r.squaredNorm();
    bool diverged = false;

    long it = 0;
    for (; it < opts.max_iters; ++it) {
      if (r.norm() <= stop_residual) break;
      Vector g = 2.0 * (X.transpose() * r);  // dL/dtheta
      Vector grad_a = net.W * g;
      net.W.noalias() -= step * (net.a * g.transpose());
      net.a -= step * grad_a;
      r = X * net.predictor() - y;
      const double loss = r.squaredNorm();
      if (!std::isfinite(loss) || loss > 10.0 * std::max(initial_loss, 1e-300)) {
        diverged = true;
        break;
      }
      const double bal = net.balance_residual();
      const double aa = net.a.squaredNorm();  // |a a^T|_F for rank one
      if (aa > 0.0)
        trace.max_balance_ratio = std::max(trace.max_balance_ratio, bal / aa);
    }

    if (diverged) {
      step *= 0.5;
      continue;
    }
    trace.iters = it;
    trace.final_loss = r.squaredNorm();
    trace.final_relative_residual = y_norm > 0.0 ? r.norm() / y_norm : r.norm();
    trace.balance_residual = net.balance_residual();
    trace.converged = r.norm() <= stop_residual;
    out.net = std::move(net);
    out.trace = trace;
    return out;
  }
  throw numeric_error(
      "train_gradient_descent: diverged at every attempted step "
      "(step too large even after backtracking)");
}

}  // namespace benign
