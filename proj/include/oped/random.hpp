#pragma once

// Deterministic random source. A thin wrapper over mt19937_64 that converts
// to doubles and samples discrete laws by CDF inversion in-library, so the
// stream of draws is identical across standard libraries and thread counts.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "oped/common.hpp"

namespace oped {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform draw in [0, 1) with 53 bits of mantissa.
  double unit() { return (eng_() >> 11) * 0x1.0p-53; }

  // Uniform draw in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Index i sampled with probability probs[i]; probs must sum to ~1.
  // Inversion walks the running sum, so the draw consumes exactly one unit().
  int sample(const std::vector<double>& probs) {
    double u = unit();
    double acc = 0.0;
    int last = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      acc += probs[i];
      last = static_cast<int>(i);
      if (u < acc) return last;
    }
    return last;
  }

  // Exponential(1) via inversion; used to build Dirichlet-style rows.
  double exponential() {
    double u = unit();
    if (u >= 1.0) u = 0.9999999999999999;
    return -std::log(1.0 - u);
  }

private:
  std::mt19937_64 eng_;
};

}  // namespace oped
