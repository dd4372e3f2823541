#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "entwb/marginal.hpp"

namespace entwb::test {

// Direct long-double summation, independent of the library's compensated
// path; reference for [DERIVED] entropy values.
inline double entropy_oracle(const std::vector<double>& probs) {
  long double acc = 0.0L;
  for (double p : probs) {
    if (p > 0.0) acc -= static_cast<long double>(p) * std::log(static_cast<long double>(p));
  }
  return static_cast<double>(acc);
}

// Deterministic generator: explicit bit mapping, no std distributions, so
// frozen seeds mean frozen instances on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(engine_() %
                                 static_cast<std::uint64_t>(hi - lo + 1));
  }

  std::vector<double> simplex(int k) {
    std::vector<double> w(static_cast<std::size_t>(k));
    double total = 0.0;
    for (double& v : w) {
      v = -std::log(1.0 - uniform01());
      if (v <= 0.0) v = 1e-12;
      total += v;
    }
    for (double& v : w) v /= total;
    return w;
  }

  MarginalDistribution marginal(int k) { return validate_marginal(simplex(k)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace entwb::test
