#include "benign/verify.hpp"

#include "benign/datagen.hpp"
#include "benign/estimator.hpp"
#include "benign/harness.hpp"
#include "benign/risk.hpp"
#include "benign/spectral.hpp"
#include "benign/spectrum.hpp"
#include "benign/table.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace benign {

using nlohmann::json;

Tolerances Tolerances::from_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("tolerances: cannot open '" + path + "'");
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw config_error(std::string("tolerances: invalid JSON: ") + e.what());
  }
  Tolerances t;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("schema_version", t.schema_version);
  get("interpolation_rel", t.interpolation_rel);
  get("kkt_residual", t.kkt_residual);
  get("brute_force_rel", t.brute_force_rel);
  get("dominance_points", t.dominance_points);
  get("flow_rel", t.flow_rel);
  get("balance_ratio", t.balance_ratio);
  get("alpha_identity_rel", t.alpha_identity_rel);
  get("trace_band", t.trace_band);
  get("alpha_ratio_lo", t.alpha_ratio_lo);
  get("alpha_ratio_hi", t.alpha_ratio_hi);
  get("decomposition_rel", t.decomposition_rel);
  get("confidence_z", t.confidence_z);
  get("rank_law_slack", t.rank_law_slack);
  get("rank_law_cases", t.rank_law_cases);
  return t;
}

std::string Tolerances::to_json() const {
  json j = {{"schema_version", schema_version},
            {"interpolation_rel", interpolation_rel},
            {"kkt_residual", kkt_residual},
            {"brute_force_rel", brute_force_rel},
            {"dominance_points", dominance_points},
            {"flow_rel", flow_rel},
            {"balance_ratio", balance_ratio},
            {"alpha_identity_rel", alpha_identity_rel},
            {"trace_band", trace_band},
            {"alpha_ratio_lo", alpha_ratio_lo},
            {"alpha_ratio_hi", alpha_ratio_hi},
            {"decomposition_rel", decomposition_rel},
            {"confidence_z", confidence_z},
            {"rank_law_slack", rank_law_slack},
            {"rank_law_cases", rank_law_cases}};
  return j.dump(2);
}

double quartic_bisection_root(double zeta, double rho) {
  auto g = [&](double a) {
    const double a2 = a * a;
    return 81.0 * a2 * a2 - 16.0 * zeta * a2 - 16.0 * rho;
  };
  if (rho == 0.0 && zeta == 0.0) return 0.0;
  double hi = 1.0;
  while (g(hi) < 0.0) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Vector nullspace_descent_minimizer(const Matrix& X, const Vector& y,
                                   const Vector& w, int restarts,
                                   std::uint64_t seed, long max_iters,
                                   double grad_tol) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeFullV);
  Matrix N = svd.matrixV().rightCols(p - n);  // orthonormal null-space basis
  Vector theta_part =
      svd.matrixV().leftCols(n) *
      (svd.matrixU().transpose() * y).cwiseQuotient(svd.singularValues());

  auto objective = [&](const Vector& theta) {
    return std::pow(theta.norm(), 1.5) - w.dot(theta);
  };

  std::mt19937_64 gen(mix_seed(seed, 0x6f7261636c65ULL));
  std::normal_distribution<double> normal(0.0, 1.0);

  Vector best_theta;
  double best_value = 0.0;
  bool have_best = false;

  for (int attempt = 0; attempt <= restarts; ++attempt) {
    Vector xi = Vector::Zero(p - n);
    if (attempt > 0)
      for (int i = 0; i < xi.size(); ++i) xi[i] = normal(gen);

    double step = 0.5;
    Vector theta = theta_part + N * xi;
    double value = objective(theta);
    for (long it = 0; it < max_iters; ++it) {
      const double nrm = theta.norm();
      Vector grad_theta = -w;
      if (nrm > 0.0) grad_theta += 1.5 / std::sqrt(nrm) * theta;
      Vector grad = N.transpose() * grad_theta;
      if (grad.norm() <= grad_tol) break;
      // Backtracking line search on the convex objective.
      bool moved = false;
      while (step > 1e-18) {
        Vector xi_next = xi - step * grad;
        Vector theta_next = theta_part + N * xi_next;
        const double value_next = objective(theta_next);
        if (value_next <= value - 0.5 * step * grad.squaredNorm()) {
          xi = std::move(xi_next);
          theta = std::move(theta_next);
          value = value_next;
          step *= 1.25;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    if (!have_best || value < best_value) {
      best_theta = theta;
      best_value = value;
      have_best = true;
    }
  }
  return best_theta;
}

namespace {

struct Failure {
  int count = 0;
  std::string first;

  void add(const std::string& msg) {
    if (count++ == 0) first = msg;
  }
  bool ok() const { return count == 0; }
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// Mixed bag of desk-scale spectra for randomized property checks.
CovarianceSpectrum random_spectrum(std::mt19937_64& gen, int p) {
  std::uniform_int_distribution<int> pick(0, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (pick(gen)) {
    case 0:
      return CovarianceSpectrum::isotropic(p);
    case 1: {
      std::uniform_int_distribution<int> kd(0, std::max(0, p / 4));
      return CovarianceSpectrum::spike(kd(gen), 0.001 + 0.1 * unit(gen), p);
    }
    case 2:
      return CovarianceSpectrum::poly(0.3 + 1.5 * unit(gen), p);
    case 3:
      return CovarianceSpectrum::exp_decay(0.9 + 0.099 * unit(gen), p);
    default: {
      // log-spaced eigenvalues over a few decades
      std::vector<double> l(p);
      const double decades = 1.0 + 4.0 * unit(gen);
      for (int i = 0; i < p; ++i)
        l[i] = std::pow(10.0, -decades * i / std::max(1, p - 1));
      return CovarianceSpectrum(std::move(l));
    }
  }
}

Vector random_unit_vector(std::mt19937_64& gen, int p) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(p);
  do {
    for (int i = 0; i < p; ++i) v[i] = normal(gen);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---- criterion 1: interpolation & stationarity -----------------------------

CriterionResult criterion_interpolation(const VerifyOptions& opts) {
  const auto t0 = Clock::now();
  const Tolerances& tol = opts.tol;
  Failure fail;
  std::mt19937_64 gen(20260501);
  double worst_interp = 0, worst_kkt = 0;

  for (int trial = 0; trial < 100; ++trial) {
    const int n = 50, p = 200;
    ProblemInstance inst{random_spectrum(gen, p), random_unit_vector(gen, p), n,
                         FeatureKind::gaussian, NoiseModel{0.5}};
    Dataset ds = sample_dataset(inst, mix_seed(11, trial));
    Vector theta0 = 2.0 * random_unit_vector(gen, p);
    Vector w = normalized_direction(theta0);
    SvdFactors svd = svd_factors(ds.X);
    ImplicitBiasSolution sol = implicit_bias_estimate(svd, ds.y, w);

    const double interp = (ds.X * sol.theta_hat - ds.y).norm() / ds.y.norm();
    const double kkt = sol.stationarity_residual(svd, w);
    worst_interp = std::max(worst_interp, interp);
    worst_kkt = std::max(worst_kkt, kkt);
    if (interp > tol.interpolation_rel)
      fail.add(fmt("trial interpolation residual %.3g > %.3g", interp,
                   tol.interpolation_rel));
    if (kkt > tol.kkt_residual)
      fail.add(fmt("trial KKT residual %.3g > %.3g", kkt, tol.kkt_residual));
  }
  return {1, "interpolation & stationarity (100 instances, n=50, p=200)",
          fail.ok(),
          fail.ok() ? fmt("max interpolation %.2e, max KKT %.2e", worst_interp,
                          worst_kkt)
                    : fail.first,
          seconds_since(t0)};
}

// ---- criterion 2: closed form vs brute force --------------------------------

CriterionResult criterion_brute_force(const VerifyOptions& opts) {
  const auto t0 = Clock::now();
  const Tolerances& tol = opts.tol;
  Failure fail;
  std::mt19937_64 gen(20260502);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst_rel = 0;

  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5, p = 12;
    ProblemInstance inst{random_spectrum(gen, p), random_unit_vector(gen, p), n,
                         FeatureKind::gaussian, NoiseModel{0.5}};
    Dataset ds = sample_dataset(inst, mix_seed(22, trial));
    Vector w = normalized_direction(1.5 * random_unit_vector(gen, p));

    SvdFactors svd = svd_factors(ds.X);
    ImplicitBiasSolution sol = implicit_bias_estimate(svd, ds.y, w);
    Vector oracle = nullspace_descent_minimizer(ds.X, ds.y, w, 3,
                                                mix_seed(23, trial));
    const double rel =
        (sol.theta_hat - oracle).norm() / std::max(1e-30, sol.theta_hat.norm());
    worst_rel = std::max(worst_rel, rel);
    if (rel > tol.brute_force_rel)
      fail.add(fmt("closed form vs descent oracle: %.3g > %.3g", rel,
                   tol.brute_force_rel));

    // Dominance over random feasible points theta_hat + N xi.
    Eigen::JacobiSVD<Matrix> full(ds.X, Eigen::ComputeFullV);
    Matrix N = full.matrixV().rightCols(p - n);
    auto objective = [&](const Vector& theta) {
      return std::pow(theta.norm(), 1.5) - w.dot(theta);
    };
    const double opt_value = objective(sol.theta_hat);
    for (int j = 0; j < tol.dominance_points; ++j) {
      Vector xi(p - n);
      for (int i = 0; i < xi.size(); ++i) xi[i] = normal(gen);
      const double value = objective(sol.theta_hat + N * xi);
      if (opt_value > value + 1e-10 * (1.0 + std::abs(value)))
        fail.add(fmt("feasible point beats the closed form by %.3g",
                     opt_value - value));
    }
  }
  return {2, "closed form vs brute force (50 instances, n=5, p=12)", fail.ok(),
          fail.ok() ? fmt("max relative gap %.2e, dominance held at %.0f "
                          "points per instance",
                          worst_rel, static_cast<double>(tol.dominance_points))
                    : fail.first,
          seconds_since(t0)};
}

// ---- criterion 3: implicit-bias cross-check ---------------------------------

CriterionResult criterion_flow(const VerifyOptions& opts) {
  const auto t0 = Clock::now();
  const Tolerances& tol = opts.tol;
  Failure fail;
  std::mt19937_64 gen(20260503);

  const int n = 20, p = 50, m = 30;
  ProblemInstance inst{CovarianceSpectrum::isotropic(p),
                       random_unit_vector(gen, p), n, FeatureKind::gaussian,
                       NoiseModel{0.25}};
  Dataset ds = sample_dataset(inst, 33);
  Vector theta0 = random_unit_vector(gen, p);
  Vector w = normalized_direction(theta0);

  SvdFactors svd = svd_factors(ds.X);
  ImplicitBiasSolution sol = implicit_bias_estimate(svd, ds.y, w);
  TwoLayerNet net = balanced_init(theta0, m, 44);
  GdResult gd = train_gradient_descent(net, ds.X, ds.y);

  const double rel =
      (gd.net.predictor() - sol.theta_hat).norm() / sol.theta_hat.norm();
  if (!gd.trace.converged)
    fail.add(fmt("gradient descent did not fit the data: residual %.3g",
                 gd.trace.final_relative_residual));
  if (rel > tol.flow_rel)
    fail.add(fmt("|W^T a - theta_hat| = %.3g relative > %.3g", rel, tol.flow_rel));
  if (gd.trace.max_balance_ratio > tol.balance_ratio)
    fail.add(fmt("balancedness drifted to %.3g > %.3g",
                 gd.trace.max_balance_ratio, tol.balance_ratio));
  return {3, "implicit-bias cross-check (GD vs closed form, n=20, p=50, m=30)",
          fail.ok(),
          fail.ok() ? fmt("relative gap %.2e after %.0f iters, balance drift "
                          "%.2e",
                          rel, static_cast<double>(gd.trace.iters),
                          gd.trace.max_balance_ratio)
                    : fail.first,
          seconds_since(t0)};
}

// ---- criterion 4: alpha sandwich and quartic --------------------------------

CriterionResult criterion_alpha_identities(const VerifyOptions& opts) {
  const auto t0 = Clock::now();
  const Tolerances& tol = opts.tol;
  Failure fail;
  std::mt19937_64 gen(20260504);
  double worst = 0;

  for (int trial = 0; trial < 100; ++trial) {
    const int n = 50, p = 200;
    ProblemInstance inst{random_spectrum(gen, p), random_unit_vector(gen, p), n,
                         FeatureKind::gaussian, NoiseModel{0.5}};
    Dataset ds = sample_dataset(inst, mix_seed(11, trial));  // criterion-1 set
    Vector w = normalized_direction(2.0 * random_unit_vector(gen, p));
    SvdFactors svd = svd_factors(ds.X);
    TransformedData td = transformed_data(svd, ds.y, w);
    const double a = alpha_star(td.y_tilde_norm, td.w_tail_norm);

    const double zeta = td.w_tail_norm * td.w_tail_norm;
    const double rho = td.y_tilde_norm * td.y_tilde_norm;
    const double quartic =
        std::abs(81.0 * a * a * a * a - 16.0 * zeta * a * a - 16.0 * rho);
    const double scale = std::max({81.0 * a * a * a * a, 16.0 * rho, 1e-30});
    worst = std::max(worst, quartic / scale);
    if (quartic > tol.alpha_identity_rel * scale)
      fail.add(fmt("quartic residual %.3g relative", quartic / scale));

    const double lower = 2.0 / 3.0 * std::sqrt(td.y_tilde_norm);
    if (a < lower * (1.0 - tol.alpha_identity_rel))
      fail.add(fmt("alpha %.6g below sandwich lower bound %.6g", a, lower));
    if (td.y_tilde_norm > 0.0) {
      const double wn = w.norm();
      const double upper =
          lower * std::sqrt(std::sqrt(1.0 + 4.0 * std::pow(wn, 4) /
                                                (81.0 * rho)) +
                            2.0 * wn * wn / (9.0 * td.y_tilde_norm));
      if (a > upper * (1.0 + tol.alpha_identity_rel))
        fail.add(fmt("alpha %.6g above sandwich upper bound %.6g", a, upper));
    }
  }
  return {4, "alpha-star sandwich and quartic identities (100 instances)",
          fail.ok(),
          fail.ok() ? fmt("max quartic residual %.2e relative", worst)
                    : fail.first,
          seconds_since(t0)};
}

// ---- criterion 5: trace concentration ---------------------------------------

CriterionResult criterion_trace(const VerifyOptions& opts) {
  const auto t0 = Clock::now();
  const Tolerances& tol = opts.tol;
  Failure fail;
  const int n = 100, trials = 50;
  const double eps = 0.001;
  ConcentrationOptions copts;
  copts.threads = opts.threads;

  std::string detail;
  double prev_abs_dev = 0;
  bool first = true;
  for (int p : {1000, 2000, 4000}) {
    ProblemInstance inst{CovarianceSpectrum::spike(0, eps, p), Vector::Zero(p),
                         n, FeatureKind::gaussian, NoiseModel{0.0}};
    ConcentrationStat st = trace_inverse_stat(inst, 0, trials, 55, copts);
    if (p == 2000 && std::abs(st.relative_deviation) > tol.trace_band)
      fail.add(fmt("relative deviation %.3g outside +/-%.2g at p=2000",
                   st.relative_deviation, tol.trace_band));
    if (!first && std::abs(st.relative_deviation) >= prev_abs_dev)
      fail.add(fmt("deviation did not shrink: %.3g -> %.3g at p=%g",
                   prev_abs_dev, std::abs(st.relative_deviation),
                   static_cast<double>(p)));
    prev_abs_dev = std::abs(st.relative_deviation);
    first = false;
    detail += fmt("p=%.0f dev %.3f; ", static_cast<double>(p),
                  st.relative_deviation);

    if (!opts.out_dir.empty()) {
      auto samples = trace_inverse_samples(inst, trials, 55, opts.threads);
      Table t;
      t.columns = {"trial", "observed", "predicted", "deviation"};
      const double predicted = n / tail_sum(inst.spectrum, 0);
      for (int i = 0; i < trials; ++i)
        t.append_row({static_cast<double>(i), samples[i], predicted,
                      (samples[i] - predicted) / predicted});
      ConcentrationStat agg = summarize_samples(samples, predicted);
      t.append_row({std::nullopt, agg.observed, agg.predicted,
                    agg.relative_deviation});
      emit_csv(t, opts.out_dir + "/trace_inverse_p" + std::to_string(p) + ".csv");
    }
  }
  return {5, "trace-inverse concentration (spike eps=0.001, n=100)", fail.ok(),
          fail.ok() ? detail : fail.first, seconds_since(t0)};
}

// ---- criterion 6: alpha-star concentration ----------------------------------

CriterionResult criterion_alpha_concentration(const VerifyOptions& opts) {
  const auto t0 = Clock::now();
  const Tolerances& tol = opts.tol;
  Failure fail;
  const int p = 4000, k = 2, trials = 100;
  const double eps = 0.001, sigma = 0.2;
  ConcentrationOptions copts;
  copts.threads = opts.threads;

  auto make_instance = [&](int n) {
    Vector theta = Vector::Zero(p);
    theta[0] = 1.0;  // unit head signal keeps |theta*| <= 1
    return ProblemInstance{CovarianceSpectrum::spike(k, eps, p), theta, n,
                           FeatureKind::gaussian, NoiseModel{sigma}};
  };

  ProblemInstance main_inst = make_instance(200);
  AlphaConcentration main_stat = alpha_concentration_stat(
      main_inst, Vector::Zero(p), trials, 66, copts);
  const double ratio = main_stat.stat.observed / main_stat.stat.predicted;
  if (!(ratio >= tol.alpha_ratio_lo && ratio <= tol.alpha_ratio_hi))
    fail.add(fmt("mean ratio %.4g outside [%.2g, %.2g]", ratio,
                 tol.alpha_ratio_lo, tol.alpha_ratio_hi));

  AlphaConcentration lo = alpha_concentration_stat(make_instance(100),
                                                   Vector::Zero(p), trials, 66,
                                                   copts);
  AlphaConcentration hi = alpha_concentration_stat(make_instance(400),
                                                   Vector::Zero(p), trials, 66,
                                                   copts);
  if (std::abs(hi.stat.relative_deviation) >=
      std::abs(lo.stat.relative_deviation))
    fail.add(fmt("deviation did not shrink from n=100 (%.4g) to n=400 (%.4g)",
                 std::abs(lo.stat.relative_deviation),
                 std::abs(hi.stat.relative_deviation)));

  if (!opts.out_dir.empty()) {
    Table t;
    t.columns = {"trial", "observed", "predicted", "deviation"};
    auto samples =
        alpha_star_samples(main_inst, Vector::Zero(p), trials, 66, opts.threads);
    for (int i = 0; i < trials; ++i)
      t.append_row({static_cast<double>(i), samples[i],
                    main_stat.stat.predicted,
                    (samples[i] - main_stat.stat.predicted) /
                        main_stat.stat.predicted});
    t.append_row({std::nullopt, main_stat.stat.observed,
                  main_stat.stat.predicted, main_stat.stat.relative_deviation});
    emit_csv(t, opts.out_dir + "/alpha_concentration_n200.csv");
  }

  return {6, "alpha-star concentration (spike k=2, eps=0.001, p=4000, w=0)",
          fail.ok(),
          fail.ok() ? fmt("ratio %.4f at n=200; |dev| %.4f -> %.4f from n=100 "
                          "to n=400",
                          ratio, std::abs(lo.stat.relative_deviation),
                          std::abs(hi.stat.relative_deviation))
                    : fail.first,
          seconds_since(t0)};
}

// ---- criterion 7: exact risk decomposition ----------------------------------

CriterionResult criterion_decomposition(const VerifyOptions& opts) {
  const auto t0 = Clock::now();
  const Tolerances& tol = opts.tol;
  Failure fail;
  std::mt19937_64 gen(20260507);
  double worst = 0;

  for (int trial = 0; trial < 60; ++trial) {
    const int n = 30, p = 150;
    ProblemInstance inst{random_spectrum(gen, p),
                         1.5 * random_unit_vector(gen, p), n,
                         FeatureKind::gaussian, NoiseModel{0.7}};
    Dataset ds = sample_dataset(inst, mix_seed(77, trial));
    Vector w = trial % 5 == 0
                   ? Vector(Vector::Zero(p))
                   : Vector(normalized_direction(random_unit_vector(gen, p)));
    SvdFactors svd = svd_factors(ds.X);
    ImplicitBiasSolution sol = implicit_bias_estimate(svd, ds.y, w);
    RiskReport rep = empirical_risk_report(sol, inst.theta_star, inst.spectrum,
                                           svd, ds.eps, w);

    const double sum = rep.bias_term + rep.cross_term + rep.noise_term;
    const double rel = std::abs(sum - rep.risk_exact) /
                       std::max(rep.risk_exact, 1e-30);
    worst = std::max(worst, rel);
    if (rel > tol.decomposition_rel)
      fail.add(fmt("three-term sum off by %.3g relative", rel));

    // Noise quadratic is identical for theta_hat and the OLS point.
    ImplicitBiasSolution ols_sol =
        implicit_bias_estimate(svd, ds.y, Vector::Zero(p));
    RiskReport ols_rep = empirical_risk_report(
        ols_sol, inst.theta_star, inst.spectrum, svd, ds.eps, Vector::Zero(p));
    const double noise_gap = std::abs(rep.noise_term - ols_rep.noise_term);
    if (noise_gap > 1e-12 * std::max(1.0, rep.noise_term))
      fail.add(fmt("noise terms differ by %.3g between theta_hat and OLS",
                   noise_gap));
  }
  return {7, "exact risk decomposition (60 instances, n=30, p=150)", fail.ok(),
          fail.ok() ? fmt("max decomposition residual %.2e relative", worst)
                    : fail.first,
          seconds_since(t0)};
}

// ---- criterion 8: benign-overfitting trend ----------------------------------

CriterionResult criterion_trend(const VerifyOptions& opts) {
  const auto t0 = Clock::now();
  const Tolerances& tol = opts.tol;
  Failure fail;
  const int p = 5000, k = 2, trials = 100;
  const double eps = 0.001, sigma = 0.5;
  const std::vector<int> n_grid = {50, 100, 200, 400};

  // Head-concentrated signal: the bias term then dominates the risk at small
  // n, which is the regime the sweep is designed to exhibit. A weak signal
  // would leave the risk at the interpolation noise floor, whose n/R_k part
  // grows over this n grid at fixed p.
  Vector theta = Vector::Zero(p);
  theta[0] = theta[1] = std::sqrt(12.0);
  CovarianceSpectrum spectrum = CovarianceSpectrum::spike(k, eps, p);
  const double s_k = tail_sum(spectrum, k);

  std::vector<double> mean_risk_zero;
  std::vector<double> pooled_gaps;
  Table sweep_table;
  sweep_table.columns = {"n", "risk_zero_mean", "risk_guess_mean", "gap_mean",
                         "gap_se"};

  for (int n : n_grid) {
    ProblemInstance inst{spectrum, theta, n, FeatureKind::gaussian,
                         NoiseModel{sigma}};
    Vector theta0 = init_for_guess(theta, sigma, n, s_k);
    Vector w_guess = normalized_direction(theta0);
    Vector w_zero = Vector::Zero(p);

    std::vector<double> risk_zero(trials), risk_guess(trials), gaps(trials);
    parallel_for(trials, opts.threads, [&](int t) {
      Dataset ds = sample_dataset(inst, mix_seed(88, t));
      SvdFactors svd = svd_factors(ds.X);
      ImplicitBiasSolution a = implicit_bias_estimate(svd, ds.y, w_zero);
      ImplicitBiasSolution b = implicit_bias_estimate(svd, ds.y, w_guess);
      risk_zero[t] = excess_risk(a.theta_hat, theta, spectrum);
      risk_guess[t] = excess_risk(b.theta_hat, theta, spectrum);
      gaps[t] = risk_zero[t] - risk_guess[t];

      // Gap attribution: the noise quadratic cancels in the pair, so the risk
      // difference must equal the bias+cross difference exactly.
      RiskReport ra = empirical_risk_report(a, theta, spectrum, svd, ds.eps,
                                            w_zero);
      RiskReport rb = empirical_risk_report(b, theta, spectrum, svd, ds.eps,
                                            w_guess);
      const double attributed = (ra.bias_term + ra.cross_term) -
                                (rb.bias_term + rb.cross_term);
      if (std::abs(gaps[t] - attributed) >
          tol.decomposition_rel *
              std::max({std::abs(gaps[t]), risk_zero[t], 1e-30}))
        fail.add(fmt("gap %.3g not attributable to bias+cross (delta %.3g)",
                     gaps[t], gaps[t] - attributed));
      if (std::abs(ra.noise_term - rb.noise_term) >
          1e-12 * std::max(1.0, ra.noise_term))
        fail.add("noise terms differ across the policy pair");
    });

    ConcentrationStat z = summarize_samples(risk_zero, 0.0);
    ConcentrationStat g = summarize_samples(risk_guess, 0.0);
    ConcentrationStat gp = summarize_samples(gaps, 0.0);
    mean_risk_zero.push_back(z.observed);
    pooled_gaps.insert(pooled_gaps.end(), gaps.begin(), gaps.end());
    sweep_table.append_row({static_cast<double>(n), z.observed, g.observed,
                            gp.observed, gp.std_error});
  }

  for (size_t i = 0; i + 1 < mean_risk_zero.size(); ++i)
    if (!(mean_risk_zero[i + 1] < mean_risk_zero[i]))
      fail.add(fmt("mean risk not strictly decreasing: %.4g -> %.4g at step %g",
                   mean_risk_zero[i], mean_risk_zero[i + 1],
                   static_cast<double>(i)));

  ConcentrationStat pooled = summarize_samples(pooled_gaps, 0.0);
  const double zscore =
      pooled.std_error > 0 ? pooled.observed / pooled.std_error : 0.0;
  if (!(zscore >= tol.confidence_z))
    fail.add(fmt("paired gap z = %.3g < %.3g: guess_exact not better at 95%%",
                 zscore, tol.confidence_z));

  if (!opts.out_dir.empty())
    emit_csv(sweep_table, opts.out_dir + "/benign_trend.csv");

  std::string detail = "risk_zero means:";
  for (double m : mean_risk_zero) detail += fmt(" %.4f", m);
  detail += fmt("; paired gap z = %.2f", zscore);
  return {8, "benign-overfitting trend (spike k=2, eps=0.001, p=5000)",
          fail.ok(), fail.ok() ? detail : fail.first, seconds_since(t0)};
}

// ---- criterion 9: effective-rank laws ---------------------------------------

CriterionResult criterion_rank_laws(const VerifyOptions& opts) {
  const auto t0 = Clock::now();
  const Tolerances& tol = opts.tol;
  Failure fail;
  std::mt19937_64 gen(20260509);
  std::uniform_int_distribution<int> pd(2, 400);

  for (int c = 0; c < tol.rank_law_cases; ++c) {
    const int p = pd(gen);
    CovarianceSpectrum spec = random_spectrum(gen, p);
    std::uniform_int_distribution<int> jd(0, p - 1);
    EffectiveRankReport rep = effective_ranks(spec, jd(gen));
    if (!(rep.r <= rep.R * (1.0 + tol.rank_law_slack)))
      fail.add(fmt("r = %.6g > R = %.6g", rep.r, rep.R));
    if (!(rep.R <= rep.r * rep.r * (1.0 + tol.rank_law_slack)))
      fail.add(fmt("R = %.6g > r^2 = %.6g", rep.R, rep.r * rep.r));

    // Random nonempty subset.
    std::vector<int> S;
    std::uniform_int_distribution<int> coin(0, 3);
    for (int i = 0; i < p; ++i)
      if (coin(gen) == 0) S.push_back(i);
    if (S.empty()) S.push_back(jd(gen));
    EffectiveRankReport sub = subset_ranks(spec, S);
    if (!(sub.r <= sub.R * (1.0 + tol.rank_law_slack) &&
          sub.R <= sub.r * sub.r * (1.0 + tol.rank_law_slack)))
      fail.add(fmt("subset ranks violate r <= R <= r^2 (r=%.6g, R=%.6g)",
                   sub.r, sub.R));

    // Monotonicity of the critical index in b and n.
    std::uniform_int_distribution<int> nd(1, 200);
    std::uniform_real_distribution<double> bd(0.5, 20.0);
    const int n1 = nd(gen);
    const int n2 = n1 + nd(gen);
    const double b1 = bd(gen);
    const double b2 = b1 + bd(gen);
    auto kval = [&](int n, double b) {
      CriticalIndex ci = critical_index(spec, n, b);
      return ci.finite() ? *ci.k : p + 1;  // infinite sorts above any finite k
    };
    if (kval(n2, b1) < kval(n1, b1))
      fail.add("critical index decreased when n grew");
    if (kval(n1, b2) < kval(n1, b1))
      fail.add("critical index decreased when b grew");
  }
  return {9, "effective-rank laws and critical-index monotonicity", fail.ok(),
          fail.ok() ? fmt("%d random spectra/subsets checked",
                          static_cast<double>(tol.rank_law_cases))
                    : fail.first,
          seconds_since(t0)};
}

// ---- criterion 10: determinism ----------------------------------------------

CriterionResult criterion_determinism(const VerifyOptions& opts) {
  const auto t0 = Clock::now();
  Failure fail;

  SweepSpec spec;
  spec.axis = "n";
  spec.values = {40, 80};
  spec.base.instance.spectrum = "spike(2,0.02,300)";
  spec.base.instance.theta_star = "random_unit(5)";
  spec.base.instance.sigma = 0.3;
  spec.base.w_policy = WPolicy::parse("guess_exact");
  spec.base.trials = 8;
  spec.base.master_seed = 99;

  auto render = [&](int threads) {
    std::ostringstream ss;
    emit_csv(run_sweep(spec, threads), ss);
    return ss.str();
  };
  const std::string once = render(1);
  const std::string twice = render(1);
  const std::string threaded = render(4);
  if (once != twice) fail.add("same seed, same threads: CSV bytes differ");
  if (once != threaded) fail.add("thread count changed the CSV bytes");
  return {10, "sweep determinism across runs and thread counts", fail.ok(),
          fail.ok() ? fmt("byte-identical CSVs (%.0f bytes)",
                          static_cast<double>(once.size()))
                    : fail.first,
          seconds_since(t0)};
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const VerifyOptions& opts,
                                            std::vector<int> criteria) {
  using Runner = CriterionResult (*)(const VerifyOptions&);
  static const Runner runners[] = {
      criterion_interpolation, criterion_brute_force,
      criterion_flow,          criterion_alpha_identities,
      criterion_trace,         criterion_alpha_concentration,
      criterion_decomposition, criterion_trend,
      criterion_rank_laws,     criterion_determinism};
  if (criteria.empty())
    for (int i = 1; i <= 10; ++i) criteria.push_back(i);
  std::vector<CriterionResult> results;
  for (int id : criteria) {
    if (id < 1 || id > 10)
      throw config_error("verify: criterion id out of range: " +
                         std::to_string(id));
    results.push_back(runners[id - 1](opts));
  }
  return results;
}

}  // namespace benign
