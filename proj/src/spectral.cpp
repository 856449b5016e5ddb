#include "benign/spectral.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace benign {

namespace {

// Mean and standard error reduced pairwise in index order, so the result is
// independent of how trials were scheduled.
double pairwise_sum(const std::vector<double>& v, size_t lo, size_t hi) {
  if (hi - lo == 1) return v[lo];
  size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

Matrix sampled_submatrix_gram(const ProblemInstance& instance,
                              const std::vector<int>& S, std::uint64_t seed) {
  Dataset ds = sample_dataset(instance, seed);
  Matrix Xs(ds.X.rows(), S.size());
  for (size_t j = 0; j < S.size(); ++j) Xs.col(j) = ds.X.col(S[j]);
  return Xs * Xs.transpose();
}

}  // namespace

ConcentrationStat summarize_samples(const std::vector<double>& samples,
                                    double predicted) {
  if (samples.empty())
    throw config_error("summarize_samples: no samples");
  ConcentrationStat st;
  st.n_trials = static_cast<long>(samples.size());
  st.predicted = predicted;
  st.observed = pairwise_sum(samples, 0, samples.size()) / samples.size();
  if (samples.size() > 1) {
    std::vector<double> sq(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
      const double d = samples[i] - st.observed;
      sq[i] = d * d;
    }
    const double var =
        pairwise_sum(sq, 0, sq.size()) / (samples.size() - 1.0);
    st.std_error = std::sqrt(var / samples.size());
  }
  st.relative_deviation =
      predicted != 0.0 ? (st.observed - predicted) / predicted : 0.0;
  return st;
}

GramDecomposition gram_head_tail(const Dataset& ds,
                                 const CovarianceSpectrum& spec, int k) {
  const int p = spec.dim();
  if (k < 0 || k >= p) throw config_error("gram_head_tail: k out of range");
  if (ds.X.cols() != p) throw config_error("gram_head_tail: dimension mismatch");
  GramDecomposition g;
  g.A = ds.X * ds.X.transpose();
  // H = sum_{i<=k} lambda_i z_i z_i^T = X_head X_head^T since
  // lambda_i z_i = X e_i.
  Matrix Z = whitened_columns(ds, spec);
  const int n = static_cast<int>(ds.X.rows());
  g.H = Matrix::Zero(n, n);
  for (int i = 0; i < k; ++i)
    g.H.noalias() += spec.lambda(i) * Z.col(i) * Z.col(i).transpose();
  g.T = Matrix::Zero(n, n);
  for (int i = p - 1; i >= k; --i)
    g.T.noalias() += spec.lambda(i) * Z.col(i) * Z.col(i).transpose();
  return g;
}

double trace_gram_inverse(const Matrix& X) {
  Eigen::BDCSVD<Matrix> svd(X);
  const auto& d = svd.singularValues();
  if (!(d[d.size() - 1] > 0.0))
    throw numeric_error("trace_gram_inverse: singular Gram matrix");
  double t = 0.0;
  for (int i = static_cast<int>(d.size()) - 1; i >= 0; --i)
    t += 1.0 / (d[i] * d[i]);
  return t;
}

std::vector<double> trace_inverse_samples(const ProblemInstance& instance,
                                          int trials, std::uint64_t master_seed,
                                          int threads) {
  instance.validate();
  if (trials < 1) throw config_error("trace_inverse_samples: trials must be >= 1");
  std::vector<double> samples(trials);
  parallel_for(trials, threads, [&](int t) {
    Dataset ds = sample_dataset(instance, mix_seed(master_seed, t));
    samples[t] = trace_gram_inverse(ds.X);
  });
  return samples;
}

ConcentrationStat trace_inverse_stat(const ProblemInstance& instance, int k,
                                     int trials, std::uint64_t master_seed,
                                     const ConcentrationOptions& opts) {
  instance.validate();
  const int n = instance.n;
  const int p = instance.p();
  if (p < opts.p_margin * (n + k)) {
    throw config_error(
        "trace_inverse_stat: tail too thin: p = " + std::to_string(p) +
        " < " + std::to_string(opts.p_margin) + " * (n + k) = " +
        std::to_string(opts.p_margin * (n + k)) +
        "; the trace approximation Tr(A^{-1}) ~ n/s_k needs p >> n + k");
  }
  const double s_k = tail_sum(instance.spectrum, k);
  return summarize_samples(
      trace_inverse_samples(instance, trials, master_seed, opts.threads),
      n / s_k);
}

std::pair<ConcentrationStat, ConcentrationStat> eigen_range_stat(
    const ProblemInstance& instance, const std::vector<int>& S, int trials,
    std::uint64_t master_seed, const ConcentrationOptions& opts) {
  instance.validate();
  if (trials < 1) throw config_error("eigen_range_stat: trials must be >= 1");
  if (static_cast<int>(S.size()) < instance.n)
    throw config_error(
        "eigen_range_stat: |S| < n would make mu_n structurally zero");
  const double s_S = subset_ranks(instance.spectrum, S).s;
  std::vector<double> top(trials), bottom(trials);
  parallel_for(trials, opts.threads, [&](int t) {
    Matrix G = sampled_submatrix_gram(instance, S, mix_seed(master_seed, t));
    Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
    top[t] = es.eigenvalues().maxCoeff();
    bottom[t] = es.eigenvalues().minCoeff();
  });
  return {summarize_samples(top, s_S), summarize_samples(bottom, s_S)};
}

std::vector<TailProbRow> smallest_eig_tail_prob(
    const ProblemInstance& instance, const std::vector<int>& S,
    const std::vector<double>& t_grid, int trials, std::uint64_t master_seed,
    const ConcentrationOptions& opts) {
  instance.validate();
  if (trials < 1) throw config_error("smallest_eig_tail_prob: trials must be >= 1");
  if (static_cast<int>(S.size()) < instance.n)
    throw config_error("smallest_eig_tail_prob: |S| < n");
  for (double t : t_grid)
    if (!(t > 0.0 && t < 1.0))
      throw config_error("smallest_eig_tail_prob: t values must lie in (0,1)");
  const double s_S = subset_ranks(instance.spectrum, S).s;
  std::vector<double> mun(trials);
  parallel_for(trials, opts.threads, [&](int t) {
    Matrix G = sampled_submatrix_gram(instance, S, mix_seed(master_seed, t));
    Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
    mun[t] = es.eigenvalues().minCoeff();
  });
  std::vector<TailProbRow> rows;
  rows.reserve(t_grid.size());
  for (double t : t_grid) {
    TailProbRow row;
    row.t = t;
    row.trials = trials;
    row.count = std::count_if(mun.begin(), mun.end(),
                              [&](double m) { return m <= t * s_S; });
    row.frequency = static_cast<double>(row.count) / trials;
    rows.push_back(row);
  }
  return rows;
}

ConcentrationStat noise_projection_stat(const Dataset& ds,
                                        const SvdFactors& svd, double sigma) {
  if (ds.eps.size() != svd.n())
    throw config_error("noise_projection_stat: dimension mismatch");
  ConcentrationStat st;
  st.n_trials = 1;
  st.observed = svd.pinv_apply(ds.eps).squaredNorm();
  st.predicted = sigma * sigma * svd.trace_gram_inverse();
  st.relative_deviation =
      st.predicted != 0.0 ? (st.observed - st.predicted) / st.predicted : 0.0;
  return st;
}

std::vector<double> alpha_star_samples(const ProblemInstance& instance,
                                       const Vector& w, int trials,
                                       std::uint64_t master_seed, int threads) {
  instance.validate();
  if (trials < 1) throw config_error("alpha_star_samples: trials must be >= 1");
  if (w.size() != instance.p())
    throw config_error("alpha_star_samples: w dimension mismatch");
  std::vector<double> samples(trials);
  parallel_for(trials, threads, [&](int t) {
    Dataset ds = sample_dataset(instance, mix_seed(master_seed, t));
    SvdFactors svd = svd_factors(ds.X);
    TransformedData td = transformed_data(svd, ds.y, w);
    samples[t] = alpha_star(td.y_tilde_norm, td.w_tail_norm);
  });
  return samples;
}

AlphaConcentration alpha_concentration_stat(const ProblemInstance& instance,
                                            const Vector& w, int trials,
                                            std::uint64_t master_seed,
                                            const ConcentrationOptions& opts) {
  instance.validate();
  if (!(instance.noise.sigma > 0.0))
    throw config_error("alpha_concentration_stat: needs sigma > 0");

  AlphaConcentration out;
  CriticalIndex ci = critical_index(instance.spectrum, instance.n, opts.b);
  const int k = ci.value();
  out.k = k;
  out.s_k = tail_sum(instance.spectrum, k);

  const int n = instance.n;
  out.flags.p_ok = instance.p() >= opts.p_margin * (n + k);
  out.flags.n_ok = n >= opts.n_margin * std::max<double>(k, out.s_k);
  out.flags.norms_ok = instance.theta_star.norm() <= 1.0 && w.norm() <= 1.0;
  if (!out.flags.p_ok)
    out.warnings.push_back("hypothesis margin violated: p < p_margin * (n + k)");
  if (!out.flags.n_ok)
    out.warnings.push_back(
        "hypothesis margin violated: n < n_margin * max{k, s_k}");
  if (!out.flags.norms_ok)
    out.warnings.push_back("hypothesis margin violated: |theta*| or |w| > 1");

  const double predicted = 2.0 * std::sqrt(instance.noise.sigma) *
                           std::pow(n, 0.25) / (3.0 * std::pow(out.s_k, 0.25));
  out.stat = summarize_samples(
      alpha_star_samples(instance, w, trials, master_seed, opts.threads),
      predicted);
  return out;
}

}  // namespace benign
