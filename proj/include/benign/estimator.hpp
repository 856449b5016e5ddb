#pragma once

#include "benign/common.hpp"

#include <cstdint>

namespace benign {

/// Singular value decomposition X = U D V^T of a full-row-rank n x p design
/// matrix with p > n. D has exactly n positive entries, so only the thin
/// factors are stored: U (n x n), the singular values d (descending), and the
/// first n right singular vectors V (p x n). The remaining p - n columns of
/// the full V span null(X) and enter only through nullspace_project.
struct SvdFactors {
  Matrix U;
  Vector d;
  Matrix V;

  int n() const { return static_cast<int>(U.rows()); }
  int p() const { return static_cast<int>(V.rows()); }

  // D^dagger U^T v: the n nonzero leading entries of the transformed vector.
  Vector pinv_apply(const Vector& v) const;

  // Projection onto null(X): w - V V^T w = (I - X^T (X X^T)^{-1} X) w.
  Vector nullspace_project(const Vector& w) const;

  double mu1() const { return d[0] * d[0]; }           // largest eig of X X^T
  double mun() const { return d[n() - 1] * d[n() - 1]; }  // smallest

  // Tr((X X^T)^{-1}) via the singular values.
  double trace_gram_inverse() const;
};

// Factorizes and certifies rank; throws numeric_error when X is rank
// deficient (a violated full-rank precondition).
SvdFactors svd_factors(const Matrix& X);

/// Data and initialization direction rotated into the SVD basis. The tail
/// block w_tilde_{n+1:p} of V^T w never materializes; its norm and its
/// original-coordinate image V w_tilde_{n+1:p} (= the null-space projection
/// of w) are what the closed form needs.
struct TransformedData {
  Vector y_tilde_head;  // leading n entries of y_tilde = D^dagger U^T y
  Vector w_tilde_head;  // leading n entries of V^T w
  Vector w_perp;        // projection of w onto null(X), length p
  double y_tilde_norm = 0;
  double w_tail_norm = 0;  // |w_tilde_{n+1:p}| = |w_perp|
};

TransformedData transformed_data(const SvdFactors& svd, const Vector& y,
                                 const Vector& w);

// Positive root of 81 a^4 - 16 zeta a^2 - 16 rho = 0 with
// zeta = w_tail_norm^2 and rho = y_tilde_norm^2:
//   alpha = sqrt((8 zeta + sqrt(64 zeta^2 + 1296 rho)) / 81).
double alpha_star(double y_tilde_norm, double w_tail_norm);

/// The interpolator selected by gradient flow on a balanced two-layer linear
/// net, as a perturbation of the min-norm interpolant:
/// theta_hat = theta_ols + alpha * Proj_{null(X)}(w).
struct ImplicitBiasSolution {
  Vector theta_hat;
  Vector theta_ols;
  Vector perturbation;  // alpha * Proj_{null(X)}(w)
  double alpha = 0;

  // Norm of the null-space projection of the objective gradient
  // (3/2) theta_hat / |theta_hat|^{1/2} - w. Skipped (returns 0) when
  // |theta_hat| < 1e-12; that requires y = 0 and a w with no tail component.
  double stationarity_residual(const SvdFactors& svd, const Vector& w) const;
};

ImplicitBiasSolution implicit_bias_estimate(const SvdFactors& svd,
                                            const Vector& y, const Vector& w);
ImplicitBiasSolution implicit_bias_estimate(const Matrix& X, const Vector& y,
                                            const Vector& w);

// Minimum l2-norm interpolant X^T (X X^T)^{-1} y, solved through the SVD.
Vector min_norm_ols(const Matrix& X, const Vector& y);
Vector min_norm_ols(const SvdFactors& svd, const Vector& y);

/// Two-layer linear network x -> a^T W x.
struct TwoLayerNet {
  Vector a;  // m
  Matrix W;  // m x p

  Vector predictor() const { return W.transpose() * a; }
  double balance_residual() const;  // |a a^T - W W^T|_F
};

// Balanced rank-one initialization inducing the predictor theta0:
// a = sqrt(|theta0|) u, W = u theta0^T / sqrt(|theta0|) for a random unit u.
// Satisfies W^T a = theta0 and a a^T = W W^T exactly.
TwoLayerNet balanced_init(const Vector& theta0, int m, std::uint64_t seed);

struct GdOptions {
  double step = 0.0;       // <= 0: 0.1 / (mu1(XX^T) (|a0|^2 + |W0|_op^2))
  long max_iters = 400000;
  double tol = 1e-9;       // stop when |y - X W^T a| <= tol * |y|
  int max_restarts = 12;   // step halvings allowed on divergence
};

struct GdTrace {
  long iters = 0;
  double step_used = 0;
  double final_loss = 0;           // |y - X W^T a|^2
  double final_relative_residual = 0;
  double balance_residual = 0;     // |a a^T - W W^T|_F at exit
  double max_balance_ratio = 0;    // max over iterations of residual / |a a^T|_F
  int restarts = 0;
  bool converged = false;
};

struct GdResult {
  TwoLayerNet net;
  GdTrace trace;
};

// Full-batch gradient descent on L(a, W) = |y - X W^T a|^2. A loss increase
// beyond 10x the initial value signals a too-large step; the step is halved
// and training restarts from the initial net. Non-convergence within
// max_iters is a reported outcome (trace.converged = false), not an error;
// numeric_error is thrown only when every allowed step keeps diverging.
GdResult train_gradient_descent(const TwoLayerNet& init, const Matrix& X,
                                const Vector& y, const GdOptions& opts = {});

}  // namespace benign
