// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Thresholds are the built-in defaults; the CLI `verify` subcommand
// runs the same suite and can override them from a tolerance file.

#include "benign/verify.hpp"

#include <cstdio>
#include <cstring>
#include <thread>

int main(int argc, char** argv) {
  benign::VerifyOptions opts;
  opts.threads = benign::default_threads();
  std::vector<int> criteria;
  for (int i = 1; i < argc; ++i) {
    if (std::strncmp(argv[i], "--threads=", 10) == 0)
      opts.threads = std::atoi(argv[i] + 10);
    else
      criteria.push_back(std::atoi(argv[i]));
  }

  auto results = benign::run_acceptance(opts, criteria);
  bool all_pass = true;
  double total = 0;
  for (const auto& r : results) {
    std::printf("%s  %2d. %-55s [%5.1fs] %s\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.seconds, r.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && r.pass;
    total += r.seconds;
  }
  std::printf("%s: %zu criteria in %.1fs\n", all_pass ? "ALL PASS" : "FAILURES",
              results.size(), total);
  return all_pass ? 0 : 1;
}
