#include "benign/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace benign {

CovarianceSpectrum::CovarianceSpectrum(std::vector<double> lambdas) {
  if (lambdas.empty()) throw config_error("spectrum: empty eigenvalue list");
  for (double l : lambdas) {
    if (!(l > 0.0) || !std::isfinite(l))
      throw config_error("spectrum: eigenvalues must be positive and finite");
  }
  if (!std::is_sorted(lambdas.begin(), lambdas.end(), std::greater<>())) {
    input_was_unsorted_ = true;
    std::sort(lambdas.begin(), lambdas.end(), std::greater<>());
  }
  lambdas_ = Eigen::Map<const Vector>(lambdas.data(),
                                      static_cast<long>(lambdas.size()));
}

CovarianceSpectrum CovarianceSpectrum::isotropic(int p) {
  if (p < 1) throw config_error("isotropic: p must be >= 1");
  return CovarianceSpectrum(std::vector<double>(p, 1.0));
}

CovarianceSpectrum CovarianceSpectrum::spike(int k, double eps, int p) {
  if (p < 1 || k < 0 || k > p) throw config_error("spike: need 0 <= k <= p");
  if (!(eps > 0.0 && eps <= 1.0)) throw config_error("spike: need 0 < eps <= 1");
  std::vector<double> l(p, eps);
  std::fill(l.begin(), l.begin() + k, 1.0);
  return CovarianceSpectrum(std::move(l));
}

CovarianceSpectrum CovarianceSpectrum::poly(double a, int p) {
  if (p < 1 || !(a > 0.0)) throw config_error("poly: need p >= 1 and a > 0");
  std::vector<double> l(p);
  for (int i = 0; i < p; ++i) l[i] = std::pow(static_cast<double>(i + 1), -a);
  return CovarianceSpectrum(std::move(l));
}

CovarianceSpectrum CovarianceSpectrum::exp_decay(double gamma, int p) {
  if (p < 1 || !(gamma > 0.0 && gamma < 1.0))
    throw config_error("exp: need p >= 1 and 0 < gamma < 1");
  std::vector<double> l(p);
  double v = 1.0;
  for (int i = 0; i < p; ++i) {
    v *= gamma;
    l[i] = v;
  }
  return CovarianceSpectrum(std::move(l));
}

namespace {

// Splits "name(arg1,arg2,...)" into name and raw argument list.
bool split_call(const std::string& s, std::string& name,
                std::vector<std::string>& args) {
  auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') return false;
  name = s.substr(0, open);
  std::string body = s.substr(open + 1, s.size() - open - 2);
  args.clear();
  if (body.empty()) return true;
  int depth = 0;
  std::string cur;
  for (char c : body) {
    if (c == '[' || c == '(') depth++;
    if (c == ']' || c == ')') depth--;
    if (c == ',' && depth == 0) {
      args.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  args.push_back(cur);
  return true;
}

std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& s, const char* what) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw config_error(std::string("spectrum preset: bad ") + what + " '" + s + "'");
  }
}

int to_int(const std::string& s, const char* what) {
  double v = to_real(s, what);
  int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw config_error(std::string("spectrum preset: ") + what + " must be an integer");
  return i;
}

}  // namespace

CovarianceSpectrum CovarianceSpectrum::parse(const std::string& preset) {
  std::string name;
  std::vector<std::string> args;
  if (!split_call(strip(preset), name, args))
    throw config_error("spectrum preset: expected name(args), got '" + preset + "'");
  name = strip(name);
  for (auto& a : args) a = strip(a);

  if (name == "isotropic" && args.size() == 1)
    return isotropic(to_int(args[0], "p"));
  if (name == "spike" && args.size() == 3)
    return spike(to_int(args[0], "k"), to_real(args[1], "eps"), to_int(args[2], "p"));
  if (name == "poly" && args.size() == 2)
    return poly(to_real(args[0], "a"), to_int(args[1], "p"));
  if (name == "exp" && args.size() == 2)
    return exp_decay(to_real(args[0], "gamma"), to_int(args[1], "p"));
  if (name == "explicit" && args.size() >= 1) {
    std::string body;
    for (size_t i = 0; i < args.size(); ++i) body += (i ? "," : "") + args[i];
    body = strip(body);
    if (body.size() < 2 || body.front() != '[' || body.back() != ']')
      throw config_error("explicit: expected a [..] list");
    std::vector<double> l;
    std::stringstream ss(body.substr(1, body.size() - 2));
    std::string item;
    while (std::getline(ss, item, ','))
      l.push_back(to_real(strip(item), "eigenvalue"));
    return CovarianceSpectrum(std::move(l));
  }
  throw config_error("spectrum preset: unknown form '" + preset + "'");
}

double CovarianceSpectrum::total_mass() const { return tail_sum(*this, 0); }

std::string CovarianceSpectrum::to_json() const {
  std::string out = "[";
  char buf[32];
  for (int i = 0; i < dim(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", lambdas_[i]);
    if (i) out += ",";
    out += buf;
  }
  out += "]";
  return out;
}

double tail_sum(const CovarianceSpectrum& spec, int j) {
  const int p = spec.dim();
  if (j < 0 || j >= p) throw config_error("tail_sum: index out of range");
  // Smallest entries first: the tail can hold thousands of tiny eigenvalues.
  double s = 0.0;
  for (int i = p - 1; i >= j; --i) s += spec.lambda(i);
  return s;
}

EffectiveRankReport effective_ranks(const CovarianceSpectrum& spec, int j) {
  const int p = spec.dim();
  if (j < 0 || j >= p) throw config_error("effective_ranks: index out of range");
  EffectiveRankReport rep;
  rep.j = j;
  rep.s = tail_sum(spec, j);
  double sq = 0.0;
  for (int i = p - 1; i >= j; --i) sq += spec.lambda(i) * spec.lambda(i);
  rep.r = rep.s / spec.lambda(j);
  rep.R = rep.s * rep.s / sq;
  return rep;
}

EffectiveRankReport subset_ranks(const CovarianceSpectrum& spec,
                                 const std::vector<int>& S) {
  if (S.empty()) throw config_error("subset_ranks: empty index set");
  std::vector<int> idx = S;
  std::sort(idx.begin(), idx.end());
  if (idx.front() < 0 || idx.back() >= spec.dim())
    throw config_error("subset_ranks: index out of range");
  double s = 0.0, sq = 0.0, lmax = 0.0;
  // Ascending eigenvalue magnitude = descending index.
  for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
    double l = spec.lambda(*it);
    s += l;
    sq += l * l;
    lmax = std::max(lmax, l);
  }
  EffectiveRankReport rep;
  rep.j = idx.front();
  rep.s = s;
  rep.r = s / lmax;
  rep.R = s * s / sq;
  return rep;
}

int CriticalIndex::value() const {
  if (!k.has_value())
    throw config_error(
        "critical index is infinite: r_j < b*n for every j; "
        "bound evaluation is undefined in this regime");
  return *k;
}

CriticalIndex critical_index(const CovarianceSpectrum& spec, int n, double b) {
  if (n < 1) throw config_error("critical_index: n must be >= 1");
  if (!(b > 0.0)) throw config_error("critical_index: b must be positive");
  CriticalIndex ci;
  ci.b = b;
  const double threshold = b * static_cast<double>(n);
  for (int j = 0; j < spec.dim(); ++j) {
    if (effective_ranks(spec, j).r >= threshold) {
      ci.k = j;
      return ci;
    }
  }
  return ci;  // infinite
}

Vector normalized_direction(const Vector& theta0) {
  double nrm = theta0.norm();
  if (nrm == 0.0) throw config_error("zero initialization vector");
  return theta0 / std::sqrt(nrm);
}

Vector psi_from_init(const Vector& theta0, double sigma, int n, double s_k) {
  if (!(sigma > 0.0)) throw config_error("psi_from_init: sigma must be positive");
  if (!(s_k > 0.0)) throw config_error("psi_from_init: s_k must be positive");
  if (n < 1) throw config_error("psi_from_init: n must be >= 1");
  const double scale = 2.0 * std::sqrt(sigma) * std::pow(n, 0.25) /
                       (3.0 * std::pow(s_k, 0.25));
  return scale * normalized_direction(theta0);
}

Vector init_for_guess(const Vector& psi_hat, double sigma, int n, double s_k) {
  if (psi_hat.norm() == 0.0) throw config_error("init_for_guess: zero guess");
  if (!(sigma > 0.0)) throw config_error("init_for_guess: sigma must be positive");
  if (!(s_k > 0.0)) throw config_error("init_for_guess: s_k must be positive");
  if (n < 1) throw config_error("init_for_guess: n must be >= 1");
  const double scale =
      2.25 * psi_hat.norm() * std::sqrt(s_k / (sigma * sigma * n));
  return scale * psi_hat;
}

}  // namespace benign
