#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace benign {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Invalid configuration or parameters (CLI exit code 2).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure at runtime, e.g. a rank-deficient design matrix
// (CLI exit code 3).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based seed derivation: trial t of a sweep draws from
// mix_seed(master_seed, t), so trials are independent and
// order-insensitive.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t state = master;
  std::uint64_t a = detail::splitmix64(state);
  state ^= 0xD1B54A32D192ED03ULL * (stream + 1);
  std::uint64_t b = detail::splitmix64(state);
  return a ^ (b + 0x2545F4914F6CDD1DULL);
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is
// processed exactly once; result slots must be preallocated by the caller so
// that the output is independent of scheduling.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

inline int default_threads() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace benign
