#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "benign/spectrum.hpp"

#include <cmath>
#include <random>

using namespace benign;

namespace {

CovarianceSpectrum log_spaced(std::mt19937_64& gen, int p) {
  std::uniform_real_distribution<double> decades(0.5, 5.0);
  const double d = decades(gen);
  std::vector<double> l(p);
  for (int i = 0; i < p; ++i)
    l[i] = std::pow(10.0, -d * i / std::max(1, p - 1));
  return CovarianceSpectrum(std::move(l));
}

}  // namespace

TEST_CASE("tail_sum on pinned examples") {
  CHECK(tail_sum(CovarianceSpectrum({1, 1, 1, 1}), 0) == doctest::Approx(4.0));
  CHECK(tail_sum(CovarianceSpectrum({1, 1, 0.5, 0.5}), 2) ==
        doctest::Approx(1.0));
  CovarianceSpectrum spike = CovarianceSpectrum::spike(3, 0.001, 1000);
  CHECK(tail_sum(spike, 3) == doctest::Approx(0.997).epsilon(1e-12));
  CHECK_THROWS_AS(tail_sum(spike, 1000), config_error);
  CHECK_THROWS_AS(tail_sum(spike, -1), config_error);
}

TEST_CASE("effective ranks on pinned examples") {
  EffectiveRankReport iso = effective_ranks(CovarianceSpectrum::isotropic(100), 0);
  CHECK(iso.r == doctest::Approx(100.0));
  CHECK(iso.R == doctest::Approx(100.0));

  EffectiveRankReport rep = effective_ranks(CovarianceSpectrum({4, 2, 2}), 0);
  CHECK(rep.s == doctest::Approx(8.0));
  CHECK(rep.r == doctest::Approx(2.0));
  CHECK(rep.R == doctest::Approx(64.0 / 24.0));
}

TEST_CASE("r <= R <= r^2 on random log-spaced spectra") {
  std::mt19937_64 gen(42);
  std::uniform_int_distribution<int> pd(2, 300);
  for (int c = 0; c < 500; ++c) {
    CovarianceSpectrum spec = log_spaced(gen, pd(gen));
    std::uniform_int_distribution<int> jd(0, spec.dim() - 1);
    EffectiveRankReport rep = effective_ranks(spec, jd(gen));
    CHECK(rep.r <= rep.R * (1 + 1e-12));
    CHECK(rep.R <= rep.r * rep.r * (1 + 1e-12));
  }
}

TEST_CASE("subset ranks") {
  CovarianceSpectrum spec({9, 4, 1});
  // indices are 0-based: {1, 2} selects the eigenvalues 4 and 1
  EffectiveRankReport rep = subset_ranks(spec, {1, 2});
  CHECK(rep.s == doctest::Approx(5.0));
  CHECK(rep.r == doctest::Approx(1.25));
  CHECK(rep.R == doctest::Approx(25.0 / 17.0));

  EffectiveRankReport single = subset_ranks(CovarianceSpectrum({3, 1}), {0});
  CHECK(single.s == doctest::Approx(3.0));
  CHECK(single.r == doctest::Approx(1.0));
  CHECK(single.R == doctest::Approx(1.0));

  CHECK_THROWS_AS(subset_ranks(spec, {}), config_error);
  CHECK_THROWS_AS(subset_ranks(spec, {3}), config_error);
}

TEST_CASE("subset of a full tail agrees with effective_ranks") {
  std::mt19937_64 gen(7);
  CovarianceSpectrum spec = log_spaced(gen, 40);
  for (int j : {0, 3, 17, 39}) {
    std::vector<int> S;
    for (int i = j; i < spec.dim(); ++i) S.push_back(i);
    EffectiveRankReport a = effective_ranks(spec, j);
    EffectiveRankReport b = subset_ranks(spec, S);
    CHECK(a.s == doctest::Approx(b.s).epsilon(1e-14));
    CHECK(a.r == doctest::Approx(b.r).epsilon(1e-14));
    CHECK(a.R == doctest::Approx(b.R).epsilon(1e-14));
  }
}

TEST_CASE("critical index") {
  CriticalIndex iso = critical_index(CovarianceSpectrum::isotropic(1000), 10, 5);
  REQUIRE(iso.finite());
  CHECK(iso.value() == 0);

  // exact-arithmetic scan oracle for the spike example
  CovarianceSpectrum spike = CovarianceSpectrum::spike(3, 0.001, 5000);
  const int n = 50;
  const double b = 10.0;
  int expected = -1;
  for (int j = 0; j < spike.dim(); ++j) {
    double s = 0;
    for (int i = spike.dim() - 1; i >= j; --i) s += spike.lambda(i);
    if (s / spike.lambda(j) >= b * n) {
      expected = j;
      break;
    }
  }
  CHECK(expected == 3);
  CriticalIndex ci = critical_index(spike, n, b);
  REQUIRE(ci.finite());
  CHECK(ci.value() == expected);

  CriticalIndex inf = critical_index(spike, 1000000000, b);
  CHECK_FALSE(inf.finite());
  CHECK_THROWS_AS(inf.value(), config_error);
}

TEST_CASE("critical index is monotone in n and b") {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> pd(2, 200), nd(1, 100);
  std::uniform_real_distribution<double> bd(0.5, 15.0);
  auto as_int = [&](const CovarianceSpectrum& s, int n, double b) {
    CriticalIndex ci = critical_index(s, n, b);
    return ci.finite() ? *ci.k : s.dim() + 1;
  };
  for (int c = 0; c < 300; ++c) {
    CovarianceSpectrum spec = log_spaced(gen, pd(gen));
    int n1 = nd(gen), n2 = n1 + nd(gen);
    double b1 = bd(gen), b2 = b1 + bd(gen);
    CHECK(as_int(spec, n2, b1) >= as_int(spec, n1, b1));
    CHECK(as_int(spec, n1, b2) >= as_int(spec, n1, b1));
  }
}

TEST_CASE("psi rescaling and its inverse") {
  Vector e1 = Vector::Zero(5);
  e1[0] = 1.0;
  Vector psi = psi_from_init(e1, 1.0, 81, 81.0);
  CHECK(psi[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(psi.tail(4).norm() == 0.0);

  // scaling theta0 by 4 scales psi by 2
  Vector psi4 = psi_from_init(4.0 * e1, 1.0, 81, 81.0);
  CHECK(psi4.norm() == doctest::Approx(2.0 * psi.norm()).epsilon(1e-14));

  Vector theta0 = init_for_guess(psi, 1.0, 81, 81.0);
  CHECK((theta0 - e1).norm() <= 1e-12);

  // |psi_hat| doubling quadruples |theta0|
  Vector t1 = init_for_guess(psi, 0.7, 33, 5.0);
  Vector t2 = init_for_guess(2.0 * psi, 0.7, 33, 5.0);
  CHECK(t2.norm() == doctest::Approx(4.0 * t1.norm()).epsilon(1e-12));

  CHECK_THROWS_AS(psi_from_init(Vector::Zero(3), 1.0, 10, 1.0), config_error);
  CHECK_THROWS_AS(init_for_guess(Vector::Zero(3), 1.0, 10, 1.0), config_error);
}

TEST_CASE("psi_from_init and init_for_guess are inverse on random guesses") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> pos(0.1, 10.0);
  std::uniform_int_distribution<int> nd(1, 500);
  for (int c = 0; c < 200; ++c) {
    int p = 1 + c % 20;
    Vector psi_hat(p);
    for (int i = 0; i < p; ++i) psi_hat[i] = normal(gen);
    if (psi_hat.norm() == 0.0) continue;
    double sigma = pos(gen), s_k = pos(gen);
    int n = nd(gen);
    Vector back =
        psi_from_init(init_for_guess(psi_hat, sigma, n, s_k), sigma, n, s_k);
    CHECK((back - psi_hat).norm() <= 1e-12 * psi_hat.norm());
  }
}

TEST_CASE("construction sorts unsorted input and rejects nonpositive") {
  CovarianceSpectrum spec({1.0, 3.0, 2.0});
  CHECK(spec.input_was_unsorted());
  CHECK(spec.lambda(0) == 3.0);
  CHECK(spec.lambda(2) == 1.0);
  CHECK_FALSE(CovarianceSpectrum({2.0, 1.0}).input_was_unsorted());
  CHECK_THROWS_AS(CovarianceSpectrum({1.0, 0.0}), config_error);
  CHECK_THROWS_AS(CovarianceSpectrum({1.0, -2.0}), config_error);
  CHECK_THROWS_AS(CovarianceSpectrum(std::vector<double>{}), config_error);
}

TEST_CASE("preset parsing") {
  CHECK(CovarianceSpectrum::parse("isotropic(10)").dim() == 10);
  CovarianceSpectrum spike = CovarianceSpectrum::parse("spike(2, 0.01, 6)");
  CHECK(spike.lambda(1) == 1.0);
  CHECK(spike.lambda(2) == 0.01);
  CovarianceSpectrum poly = CovarianceSpectrum::parse("poly(1.0, 4)");
  CHECK(poly.lambda(3) == doctest::Approx(0.25));
  CovarianceSpectrum expd = CovarianceSpectrum::parse("exp(0.5, 3)");
  CHECK(expd.lambda(2) == doctest::Approx(0.125));
  CovarianceSpectrum ex = CovarianceSpectrum::parse("explicit([3, 2, 1])");
  CHECK(ex.dim() == 3);
  CHECK(ex.lambda(0) == 3.0);
  CHECK(ex.to_json() == "[3,2,1]");
  CHECK_THROWS_AS(CovarianceSpectrum::parse("nope(1)"), config_error);
  CHECK_THROWS_AS(CovarianceSpectrum::parse("spike(2)"), config_error);
}

TEST_CASE("tail sums decrease strictly in j") {
  std::mt19937_64 gen(5);
  CovarianceSpectrum spec = log_spaced(gen, 60);
  for (int j = 1; j < spec.dim(); ++j)
    CHECK(tail_sum(spec, j) < tail_sum(spec, j - 1));
}
