#pragma once

#include "benign/common.hpp"
#include "benign/spectrum.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace benign {

// Per-coordinate law of u in x = Sigma^{1/2} u. All kinds are mean zero with
// unit variance; rademacher has discrete support and therefore misses the
// small-ball (anti-concentration) property the sharper tail bounds rely on.
enum class FeatureKind { gaussian, uniform, rademacher };

bool satisfies_anticoncentration(FeatureKind kind);
FeatureKind parse_feature_kind(const std::string& name);
std::string feature_kind_name(FeatureKind kind);

struct NoiseModel {
  double sigma = 1.0;  // response-unit standard deviation, >= 0
};

struct ProblemInstance {
  CovarianceSpectrum spectrum;
  Vector theta_star;
  int n = 0;
  FeatureKind features = FeatureKind::gaussian;
  NoiseModel noise;

  int p() const { return spectrum.dim(); }
  // Overparameterized regime p > n plus dimension consistency.
  void validate() const;
};

struct Dataset {
  Matrix X;      // n x p
  Vector y;      // = X theta_star + eps, exactly as constructed
  Vector eps;
  std::uint64_t seed = 0;
};

// Rows x_i = Sigma^{1/2} u_i with i.i.d. unit-variance coordinates from the
// instance's feature kind; eps_i i.i.d. N(0, sigma^2) independent of X.
// Pure function of (instance, seed).
Dataset sample_dataset(const ProblemInstance& instance, std::uint64_t seed);

// Independent noise draw with the dataset's conventions (test resampling).
Vector sample_noise(int n, double sigma, std::uint64_t seed);

// z_i = X e_i / sqrt(lambda_i), returned as the columns of an n x p matrix.
Matrix whitened_columns(const Dataset& ds, const CovarianceSpectrum& spec);

struct RankCertificate {
  bool full_row_rank = false;
  double smin = 0;
  double smax = 0;
};

// Full row rank iff smin > 1e-8 * smax (double-precision SVD noise floor
// with safety margin).
RankCertificate rank_certificate(const Matrix& X);

// theta_star presets: "zero", "e1", "random_unit(seed)", "explicit([...])".
Vector make_theta_star(const std::string& preset, int p);

// Row-major X with y and eps columns appended, RFC 4180.
void write_dataset_csv(const Dataset& ds, std::ostream& out);

}  // namespace benign
