#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "benign/datagen.hpp"
#include "benign/estimator.hpp"
#include "benign/verify.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace benign;

namespace {

Matrix identity_block(int n, int p) {
  Matrix X = Matrix::Zero(n, p);
  X.topLeftCorner(n, n).setIdentity();
  return X;
}

Dataset random_instance(int n, int p, double sigma, std::uint64_t seed) {
  ProblemInstance inst{CovarianceSpectrum::poly(0.7, p),
                       make_theta_star("random_unit(4)", p), n,
                       FeatureKind::gaussian, NoiseModel{sigma}};
  return sample_dataset(inst, seed);
}

Vector random_vec(std::mt19937_64& gen, int p) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(p);
  for (int i = 0; i < p; ++i) v[i] = normal(gen);
  return v;
}

}  // namespace

TEST_CASE("svd factors of an identity block") {
  Matrix X = identity_block(4, 9);
  SvdFactors f = svd_factors(X);
  for (int i = 0; i < 4; ++i) CHECK(f.d[i] == doctest::Approx(1.0));
  Vector y(4);
  y << 1, 2, 3, 4;
  // D^dagger U^T y recovers y up to the sign ambiguity of the factors
  Vector yt = f.pinv_apply(y);
  CHECK(yt.norm() == doctest::Approx(y.norm()).epsilon(1e-12));
  CHECK((f.U * f.d.asDiagonal() * f.V.transpose() - X).norm() <= 1e-12);
}

TEST_CASE("svd scaling homogeneity and reconstruction") {
  Dataset ds = random_instance(20, 50, 0.5, 8);
  SvdFactors a = svd_factors(ds.X);
  SvdFactors b = svd_factors(Matrix(3.0 * ds.X));
  CHECK((b.d - 3.0 * a.d).norm() <= 1e-10 * a.d.norm());
  CHECK((a.U * a.d.asDiagonal() * a.V.transpose() - ds.X).norm() <=
        1e-10 * ds.X.norm());
}

TEST_CASE("svd factors reject rank-deficient designs") {
  Matrix X = Matrix::Zero(3, 7);
  X.row(0).setOnes();
  X.row(1).setOnes();
  X(2, 1) = 1.0;
  CHECK_THROWS_AS(svd_factors(X), numeric_error);
  CHECK_THROWS_AS(svd_factors(Matrix::Zero(2, 5)), numeric_error);
  CHECK_THROWS_AS(svd_factors(Matrix::Ones(5, 3)), config_error);  // p <= n
}

TEST_CASE("alpha_star pinned values") {
  // zeta = 0: reduces to (2/3) |y_tilde|^{1/2}
  CHECK(alpha_star(9.0, 0.0) == doctest::Approx(2.0).epsilon(1e-14));
  // rho = 0, zeta = 81/16: sqrt(16 zeta / 81) = 1
  CHECK(alpha_star(0.0, std::sqrt(81.0 / 16.0)) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(alpha_star(0.0, 0.0) == 0.0);
}

TEST_CASE("alpha_star agrees with a bisection solve of the quartic") {
  CHECK(alpha_star(1.0, 1.0) ==
        doctest::Approx(quartic_bisection_root(1.0, 1.0)).epsilon(1e-10));
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  for (int c = 0; c < 200; ++c) {
    const double zeta = u(gen), rho = u(gen);
    const double a = alpha_star(std::sqrt(rho), std::sqrt(zeta));
    CHECK(a == doctest::Approx(quartic_bisection_root(zeta, rho)).epsilon(1e-10));
  }
}

TEST_CASE("implicit bias estimate: w = 0 collapses to OLS") {
  Dataset ds = random_instance(12, 30, 0.4, 9);
  ImplicitBiasSolution sol =
      implicit_bias_estimate(ds.X, ds.y, Vector::Zero(30));
  CHECK((sol.theta_hat - sol.theta_ols).norm() == 0.0);
  CHECK(sol.perturbation.norm() == 0.0);
}

TEST_CASE("implicit bias estimate: zero problem") {
  Dataset ds = random_instance(6, 15, 0.0, 10);
  ImplicitBiasSolution sol =
      implicit_bias_estimate(ds.X, Vector::Zero(6), Vector::Zero(15));
  CHECK(sol.theta_hat.norm() == 0.0);
  CHECK(sol.alpha == 0.0);
}

TEST_CASE("implicit bias estimate matches the null-space descent oracle") {
  std::mt19937_64 gen(22);
  for (int trial = 0; trial < 10; ++trial) {
    Dataset ds = random_instance(5, 12, 0.6, mix_seed(40, trial));
    Vector w = normalized_direction(random_vec(gen, 12));
    ImplicitBiasSolution sol = implicit_bias_estimate(ds.X, ds.y, w);
    Vector oracle =
        nullspace_descent_minimizer(ds.X, ds.y, w, 3, mix_seed(41, trial));
    CHECK((sol.theta_hat - oracle).norm() <= 1e-4 * sol.theta_hat.norm());
  }
}

TEST_CASE("interpolation, stationarity, quartic and sandwich invariants") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 20; ++trial) {
    Dataset ds = random_instance(15, 60, 0.5, mix_seed(50, trial));
    Vector w = normalized_direction(2.0 * random_vec(gen, 60));
    SvdFactors svd = svd_factors(ds.X);
    ImplicitBiasSolution sol = implicit_bias_estimate(svd, ds.y, w);

    CHECK((ds.X * sol.theta_hat - ds.y).norm() <= 1e-8 * ds.y.norm());
    CHECK((ds.X * sol.perturbation).norm() <= 1e-8 * ds.y.norm());
    CHECK(sol.stationarity_residual(svd, w) <= 1e-6);

    TransformedData td = transformed_data(svd, ds.y, w);
    const double zeta = td.w_tail_norm * td.w_tail_norm;
    const double rho = td.y_tilde_norm * td.y_tilde_norm;
    const double a = sol.alpha;
    CHECK(std::abs(81 * a * a * a * a - 16 * zeta * a * a - 16 * rho) <=
          1e-8 * std::max(81 * a * a * a * a, 1.0));

    const double lower = 2.0 / 3.0 * std::sqrt(td.y_tilde_norm);
    const double wn = w.norm();
    const double upper =
        lower * std::sqrt(std::sqrt(1.0 + 4.0 * std::pow(wn, 4) / (81.0 * rho)) +
                          2.0 * wn * wn / (9.0 * td.y_tilde_norm));
    CHECK(a >= lower * (1 - 1e-12));
    CHECK(a <= upper * (1 + 1e-12));

    // in-span parts of theta_hat and theta_ols coincide
    Vector diff = sol.theta_hat - sol.theta_ols;
    CHECK((diff - svd.nullspace_project(diff)).norm() <= 1e-10 * diff.norm());
  }
}

TEST_CASE("objective dominance over random feasible perturbations") {
  std::mt19937_64 gen(24);
  Dataset ds = random_instance(8, 20, 0.5, 60);
  Vector w = normalized_direction(random_vec(gen, 20));
  ImplicitBiasSolution sol = implicit_bias_estimate(ds.X, ds.y, w);
  auto objective = [&](const Vector& t) {
    return std::pow(t.norm(), 1.5) - w.dot(t);
  };
  Eigen::JacobiSVD<Matrix> full(ds.X, Eigen::ComputeFullV);
  Matrix N = full.matrixV().rightCols(12);
  const double opt = objective(sol.theta_hat);
  for (int j = 0; j < 200; ++j) {
    Vector xi = random_vec(gen, 12);
    CHECK(opt <= objective(sol.theta_hat + N * xi) + 1e-10);
  }
}

TEST_CASE("min-norm OLS") {
  Matrix X = identity_block(3, 8);
  Vector y(3);
  y << 2, -1, 5;
  Vector theta = min_norm_ols(X, y);
  CHECK((theta.head(3) - y).norm() <= 1e-12);
  CHECK(theta.tail(5).norm() <= 1e-12);

  // any other interpolant is longer
  std::mt19937_64 gen(25);
  Dataset ds = random_instance(7, 18, 0.3, 70);
  Vector ols = min_norm_ols(ds.X, ds.y);
  Eigen::JacobiSVD<Matrix> full(ds.X, Eigen::ComputeFullV);
  Matrix N = full.matrixV().rightCols(11);
  for (int j = 0; j < 100; ++j) {
    Vector xi = random_vec(gen, 11);
    if (xi.norm() == 0.0) continue;
    Vector other = ols + N * xi;
    CHECK((ds.X * other - ds.y).norm() <= 1e-8 * ds.y.norm());
    CHECK(other.norm() > ols.norm());
    // Pythagoras
    CHECK(other.squaredNorm() ==
          doctest::Approx(ols.squaredNorm() + (N * xi).squaredNorm())
              .epsilon(1e-10));
  }
}

TEST_CASE("balanced rank-one initialization") {
  Vector theta0 = Vector::Zero(6);
  theta0[0] = 4.0;
  TwoLayerNet scalar = balanced_init(theta0, 1, 1);
  CHECK(std::abs(scalar.a[0]) == doctest::Approx(2.0));
  CHECK(std::abs(scalar.W(0, 0)) == doctest::Approx(2.0));
  CHECK(scalar.W.row(0).tail(5).norm() == 0.0);
  CHECK(scalar.balance_residual() == doctest::Approx(0.0));

  std::mt19937_64 gen(26);
  Vector t2 = random_vec(gen, 30);
  TwoLayerNet net = balanced_init(t2, 12, 2);
  CHECK((net.predictor() - t2).norm() <= 1e-12 * t2.norm());
  CHECK(net.balance_residual() <= 1e-12 * net.a.squaredNorm());
  Eigen::JacobiSVD<Matrix> wsvd(net.W);
  CHECK(wsvd.singularValues()[1] <= 1e-12 * wsvd.singularValues()[0]);

  CHECK_THROWS_AS(balanced_init(Vector::Zero(4), 3, 1), config_error);
}

TEST_CASE("gradient of the two-layer loss matches finite differences") {
  std::mt19937_64 gen(27);
  const int n = 6, p = 10, m = 4;
  Dataset ds = random_instance(n, p, 0.5, 80);
  Vector a = random_vec(gen, m);
  Matrix W(m, p);
  for (int i = 0; i < m; ++i) W.row(i) = random_vec(gen, p).transpose();

  auto loss = [&](const Vector& av, const Matrix& Wv) {
    return (ds.y - ds.X * Wv.transpose() * av).squaredNorm();
  };
  Vector g = 2.0 * ds.X.transpose() * (ds.X * W.transpose() * a - ds.y);
  Vector grad_a = W * g;
  Matrix grad_W = a * g.transpose();

  const double h = 1e-6;
  for (int i = 0; i < m; ++i) {
    Vector ap = a, am = a;
    ap[i] += h;
    am[i] -= h;
    const double fd = (loss(ap, W) - loss(am, W)) / (2 * h);
    CHECK(grad_a[i] == doctest::Approx(fd).epsilon(1e-5));
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < p; j += 3) {
      Matrix Wp = W, Wm = W;
      Wp(i, j) += h;
      Wm(i, j) -= h;
      const double fd = (loss(a, Wp) - loss(a, Wm)) / (2 * h);
      CHECK(grad_W(i, j) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("already-interpolating net is a fixed point") {
  Dataset ds = random_instance(5, 14, 0.0, 90);
  // construct a net whose predictor interpolates: theta = min_norm_ols
  Vector theta = min_norm_ols(ds.X, ds.y);
  TwoLayerNet net = balanced_init(theta, 7, 3);
  GdResult out = train_gradient_descent(net, ds.X, ds.y);
  CHECK(out.trace.iters == 0);
  CHECK((out.net.predictor() - theta).norm() <= 1e-12 * theta.norm());
}

TEST_CASE("gradient descent reaches the closed-form implicit bias") {
  std::mt19937_64 gen(28);
  const int n = 20, p = 50, m = 30;
  ProblemInstance inst{CovarianceSpectrum::isotropic(p),
                       make_theta_star("random_unit(6)", p), n,
                       FeatureKind::gaussian, NoiseModel{0.25}};
  Dataset ds = sample_dataset(inst, 91);
  Vector theta0 = normalized_direction(random_vec(gen, p));
  theta0 /= theta0.norm();
  Vector w = normalized_direction(theta0);

  ImplicitBiasSolution sol = implicit_bias_estimate(ds.X, ds.y, w);
  TwoLayerNet net = balanced_init(theta0, m, 92);
  GdResult out = train_gradient_descent(net, ds.X, ds.y);

  CHECK(out.trace.converged);
  CHECK((out.net.predictor() - sol.theta_hat).norm() <=
        1e-3 * sol.theta_hat.norm());
  CHECK(out.trace.max_balance_ratio <= 1e-4);
}

TEST_CASE("gradient descent halves the step on divergence") {
  Dataset ds = random_instance(8, 22, 0.2, 93);
  Vector theta0 = Vector::Ones(22);
  TwoLayerNet net = balanced_init(theta0, 5, 94);
  GdOptions opts;
  opts.step = 1.0;  // far too large; must backtrack rather than error
  opts.max_iters = 50000;
  GdResult out = train_gradient_descent(net, ds.X, ds.y, opts);
  CHECK(out.trace.restarts > 0);
  CHECK(out.trace.converged);

  GdOptions hopeless = opts;
  hopeless.max_restarts = 0;
  CHECK_THROWS_AS(train_gradient_descent(net, ds.X, ds.y, hopeless),
                  numeric_error);
}

TEST_CASE("transformed data") {
  Dataset ds = random_instance(9, 24, 0.5, 95);
  SvdFactors svd = svd_factors(ds.X);

  TransformedData zero = transformed_data(svd, ds.y, Vector::Zero(24));
  CHECK(zero.w_tail_norm == 0.0);
  CHECK(zero.w_perp.norm() == 0.0);

  std::mt19937_64 gen(29);
  Vector w = random_vec(gen, 24);
  TransformedData td = transformed_data(svd, ds.y, w);
  // |w_tilde|^2 = |head|^2 + |tail|^2 must match |w|^2
  CHECK(td.w_tilde_head.squaredNorm() + td.w_tail_norm * td.w_tail_norm ==
        doctest::Approx(w.squaredNorm()).epsilon(1e-12));
  // |D y_tilde_head| = |U^T y|
  CHECK((svd.d.asDiagonal() * td.y_tilde_head).norm() ==
        doctest::Approx((svd.U.transpose() * ds.y).norm()).epsilon(1e-12));

  Matrix I5 = identity_block(5, 11);
  Vector y5(5);
  y5 << 1, 2, 3, 4, 5;
  TransformedData tid = transformed_data(svd_factors(I5), y5, Vector::Zero(11));
  CHECK(tid.y_tilde_norm == doctest::Approx(y5.norm()).epsilon(1e-12));
}
