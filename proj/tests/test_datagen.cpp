#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "benign/datagen.hpp"

#include <cmath>
#include <sstream>

using namespace benign;

namespace {

ProblemInstance iso_instance(int n, int p, double sigma,
                             FeatureKind kind = FeatureKind::gaussian) {
  ProblemInstance inst{CovarianceSpectrum::isotropic(p),
                       make_theta_star("random_unit(3)", p), n, kind,
                       NoiseModel{sigma}};
  return inst;
}

}  // namespace

TEST_CASE("noiseless construction gives y = X theta_star exactly") {
  ProblemInstance inst = iso_instance(10, 25, 0.0);
  Dataset ds = sample_dataset(inst, 123);
  CHECK((ds.y - ds.X * inst.theta_star).norm() == 0.0);
  CHECK(ds.eps.norm() == 0.0);
}

TEST_CASE("same seed gives a bitwise-identical dataset") {
  ProblemInstance inst = iso_instance(15, 40, 0.7, FeatureKind::uniform);
  Dataset a = sample_dataset(inst, 99);
  Dataset b = sample_dataset(inst, 99);
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);
  CHECK(a.eps == b.eps);
  Dataset c = sample_dataset(inst, 100);
  CHECK(a.X != c.X);
}

TEST_CASE("column variances match the spectrum across seeds") {
  // law-of-large-numbers oracle: 50 seeds, isotropic n=200, p=400
  const int n = 200, p = 400, seeds = 50;
  ProblemInstance inst = iso_instance(n, p, 0.0);
  Vector ssq = Vector::Zero(p);
  for (int s = 0; s < seeds; ++s) {
    Dataset ds = sample_dataset(inst, mix_seed(1000, s));
    ssq += ds.X.colwise().squaredNorm();
  }
  for (int j = 0; j < p; ++j) {
    const double var = ssq[j] / (static_cast<double>(n) * seeds);
    CHECK(var == doctest::Approx(1.0).epsilon(0.25));
  }
}

TEST_CASE("per-coordinate moments of u across feature kinds") {
  const int n = 100, p = 50, seeds = 20;
  for (FeatureKind kind : {FeatureKind::gaussian, FeatureKind::uniform,
                           FeatureKind::rademacher}) {
    ProblemInstance inst = iso_instance(n, p, 0.0, kind);
    double sum = 0, sumsq = 0;
    for (int s = 0; s < seeds; ++s) {
      Dataset ds = sample_dataset(inst, mix_seed(2000, s));
      sum += ds.X.sum();
      sumsq += ds.X.squaredNorm();
    }
    const double count = static_cast<double>(n) * p * seeds;
    CHECK(std::abs(sum / count) <= 4.0 / std::sqrt(count));
    CHECK(std::abs(sumsq / count - 1.0) <= 5.0 / std::sqrt(count));
  }
}

TEST_CASE("anticoncentration flags") {
  CHECK(satisfies_anticoncentration(FeatureKind::gaussian));
  CHECK(satisfies_anticoncentration(FeatureKind::uniform));
  CHECK_FALSE(satisfies_anticoncentration(FeatureKind::rademacher));
  CHECK(parse_feature_kind("rademacher") == FeatureKind::rademacher);
  CHECK_THROWS_AS(parse_feature_kind("cauchy"), config_error);
}

TEST_CASE("whitened columns") {
  CovarianceSpectrum iso = CovarianceSpectrum::isotropic(30);
  ProblemInstance inst{iso, make_theta_star("e1", 30), 12,
                       FeatureKind::gaussian, NoiseModel{0.0}};
  Dataset ds = sample_dataset(inst, 5);
  Matrix Z = whitened_columns(ds, iso);
  CHECK((Z - ds.X).norm() == 0.0);

  // lambda = 4, column (2,2) -> z = (1,1)
  Dataset tiny;
  tiny.X = Matrix::Constant(2, 2, 2.0);
  Matrix Zt = whitened_columns(tiny, CovarianceSpectrum({4.0, 4.0}));
  CHECK((Zt - Matrix::Ones(2, 2)).norm() == 0.0);
}

TEST_CASE("whitened norms concentrate: mean |z_i|^2 / n near 1") {
  const int n = 100, trials = 100;
  CovarianceSpectrum spec = CovarianceSpectrum::poly(1.0, 150);
  ProblemInstance inst{spec, make_theta_star("zero", 150), n,
                       FeatureKind::gaussian, NoiseModel{0.0}};
  double acc = 0;
  long cnt = 0;
  for (int t = 0; t < trials; ++t) {
    Dataset ds = sample_dataset(inst, mix_seed(3000, t));
    Matrix Z = whitened_columns(ds, spec);
    acc += Z.squaredNorm() / n;
    cnt += Z.cols();
  }
  CHECK(acc / cnt == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("whitening identity reassembles the Gram matrix") {
  CovarianceSpectrum spec = CovarianceSpectrum::spike(2, 0.05, 80);
  ProblemInstance inst{spec, make_theta_star("zero", 80), 20,
                       FeatureKind::gaussian, NoiseModel{0.0}};
  Dataset ds = sample_dataset(inst, 17);
  Matrix Z = whitened_columns(ds, spec);
  Matrix G = Matrix::Zero(20, 20);
  for (int i = 79; i >= 0; --i)
    G.noalias() += spec.lambda(i) * Z.col(i) * Z.col(i).transpose();
  Matrix A = ds.X * ds.X.transpose();
  CHECK((G - A).norm() <= 1e-10 * A.norm());
}

TEST_CASE("rank certificate") {
  ProblemInstance inst = iso_instance(10, 20, 0.0);
  Dataset ds = sample_dataset(inst, 31);
  CHECK(rank_certificate(ds.X).full_row_rank);

  Matrix dup = ds.X;
  dup.row(3) = dup.row(7);
  CHECK_FALSE(rank_certificate(dup).full_row_rank);

  RankCertificate zero = rank_certificate(Matrix::Zero(4, 9));
  CHECK_FALSE(zero.full_row_rank);
  CHECK(zero.smin == 0.0);
}

TEST_CASE("instance validation") {
  ProblemInstance bad = iso_instance(30, 20, 1.0);  // p <= n
  CHECK_THROWS_AS(bad.validate(), config_error);
  ProblemInstance mismatch{CovarianceSpectrum::isotropic(10),
                           make_theta_star("e1", 9), 5, FeatureKind::gaussian,
                           NoiseModel{1.0}};
  CHECK_THROWS_AS(mismatch.validate(), config_error);
}

TEST_CASE("theta_star presets") {
  CHECK(make_theta_star("zero", 4).norm() == 0.0);
  Vector e1 = make_theta_star("e1", 4);
  CHECK(e1[0] == 1.0);
  CHECK(e1.norm() == 1.0);
  Vector r1 = make_theta_star("random_unit(9)", 50);
  Vector r2 = make_theta_star("random_unit(9)", 50);
  CHECK((r1 - r2).norm() == 0.0);
  CHECK(r1.norm() == doctest::Approx(1.0).epsilon(1e-12));
  Vector ex = make_theta_star("explicit([1.5,0,2])", 3);
  CHECK(ex[2] == 2.0);
  CHECK_THROWS_AS(make_theta_star("explicit([1,2])", 3), config_error);
  CHECK_THROWS_AS(make_theta_star("bogus", 3), config_error);
}

TEST_CASE("dataset CSV layout") {
  ProblemInstance inst = iso_instance(3, 4, 0.5);
  Dataset ds = sample_dataset(inst, 77);
  std::ostringstream out;
  write_dataset_csv(ds, out);
  std::string text = out.str();
  CHECK(text.rfind("x1,x2,x3,x4,y,eps\r\n", 0) == 0);
  // one header + n data lines
  size_t lines = 0;
  for (size_t pos = 0; (pos = text.find("\r\n", pos)) != std::string::npos;
       pos += 2)
    ++lines;
  CHECK(lines == 4);
}
