#include "benign/datagen.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

namespace benign {

bool satisfies_anticoncentration(FeatureKind kind) {
  return kind != FeatureKind::rademacher;
}

FeatureKind parse_feature_kind(const std::string& name) {
  if (name == "gaussian") return FeatureKind::gaussian;
  if (name == "uniform") return FeatureKind::uniform;
  if (name == "rademacher") return FeatureKind::rademacher;
  throw config_error("unknown feature kind '" + name + "'");
}

std::string feature_kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::gaussian: return "gaussian";
    case FeatureKind::uniform: return "uniform";
    case FeatureKind::rademacher: return "rademacher";
  }
  return "?";
}

void ProblemInstance::validate() const {
  if (theta_star.size() != spectrum.dim())
    throw config_error("instance: theta_star length does not match spectrum");
  if (n < 1) throw config_error("instance: n must be >= 1");
  if (p() <= n)
    throw config_error("instance: requires the overparameterized regime p > n");
  if (noise.sigma < 0.0) throw config_error("instance: sigma must be >= 0");
}

namespace {

constexpr double kUniformHalfWidth = 1.7320508075688772;  // sqrt(3): unit variance

class FeatureSampler {
 public:
  FeatureSampler(FeatureKind kind, std::uint64_t seed)
      : kind_(kind), gen_(seed), normal_(0.0, 1.0),
        uniform_(-kUniformHalfWidth, kUniformHalfWidth), coin_(0.5) {}

  double draw() {
    switch (kind_) {
      case FeatureKind::gaussian: return normal_(gen_);
      case FeatureKind::uniform: return uniform_(gen_);
      case FeatureKind::rademacher: return coin_(gen_) ? 1.0 : -1.0;
    }
    return 0.0;
  }

  double draw_normal() { return normal_(gen_); }

 private:
  FeatureKind kind_;
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
  std::bernoulli_distribution coin_;
};

}  // namespace

Dataset sample_dataset(const ProblemInstance& instance, std::uint64_t seed) {
  instance.validate();
  const int n = instance.n;
  const int p = instance.p();

  FeatureSampler sampler(instance.features, seed);
  Dataset ds;
  ds.seed = seed;
  ds.X.resize(n, p);
  Vector sqrt_lambda = instance.spectrum.lambdas().cwiseSqrt();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) ds.X(i, j) = sqrt_lambda[j] * sampler.draw();

  ds.eps.resize(n);
  const double sigma = instance.noise.sigma;
  for (int i = 0; i < n; ++i) ds.eps[i] = sigma * sampler.draw_normal();

  ds.y = ds.X * instance.theta_star + ds.eps;
  return ds;
}

Vector sample_noise(int n, double sigma, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector eps(n);
  for (int i = 0; i < n; ++i) eps[i] = sigma * normal(gen);
  return eps;
}

Matrix whitened_columns(const Dataset& ds, const CovarianceSpectrum& spec) {
  if (spec.dim() != ds.X.cols())
    throw config_error("whitened_columns: spectrum does not match X");
  Matrix Z = ds.X;
  for (int j = 0; j < Z.cols(); ++j) Z.col(j) /= std::sqrt(spec.lambda(j));
  return Z;
}

RankCertificate rank_certificate(const Matrix& X) {
  RankCertificate cert;
  if (X.rows() == 0 || X.cols() == 0) return cert;
  Eigen::BDCSVD<Matrix> svd(X);
  const auto& sv = svd.singularValues();
  cert.smax = sv(0);
  cert.smin = sv(sv.size() - 1);
  cert.full_row_rank =
      X.cols() >= X.rows() && cert.smin > 1e-8 * cert.smax && cert.smax > 0.0;
  return cert;
}

Vector make_theta_star(const std::string& preset, int p) {
  if (preset == "zero") return Vector::Zero(p);
  if (preset == "e1") {
    Vector v = Vector::Zero(p);
    v[0] = 1.0;
    return v;
  }
  if (preset.rfind("random_unit(", 0) == 0 && preset.back() == ')') {
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(preset.substr(12, preset.size() - 13));
    } catch (const std::exception&) {
      throw config_error("theta_star: bad seed in '" + preset + "'");
    }
    std::mt19937_64 gen(mix_seed(seed, 0x7468657461ULL));
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(p);
    for (int i = 0; i < p; ++i) v[i] = normal(gen);
    double nrm = v.norm();
    if (nrm == 0.0) v[0] = 1.0, nrm = 1.0;
    return v / nrm;
  }
  if (preset.rfind("explicit([", 0) == 0 && preset.substr(preset.size() - 2) == "])") {
    std::vector<double> vals;
    std::stringstream ss(preset.substr(10, preset.size() - 12));
    std::string item;
    while (std::getline(ss, item, ',')) vals.push_back(std::stod(item));
    if (static_cast<int>(vals.size()) != p)
      throw config_error("theta_star: explicit list length does not match p");
    return Eigen::Map<const Vector>(vals.data(), p);
  }
  throw config_error("theta_star: unknown preset '" + preset + "'");
}

void write_dataset_csv(const Dataset& ds, std::ostream& out) {
  const int n = static_cast<int>(ds.X.rows());
  const int p = static_cast<int>(ds.X.cols());
  for (int j = 0; j < p; ++j) out << "x" << (j + 1) << ",";
  out << "y,eps\r\n";
  char buf[40];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.X(i, j));
      out << buf << ",";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", ds.y[i]);
    out << buf << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", ds.eps[i]);
    out << buf << "\r\n";
  }
}

}  // namespace benign
