#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace otmc {

/// mt19937_64 with hand-rolled output maps, so streams are identical across
/// standard libraries (std::*_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Exponential(1); a vector of these normalized is Dirichlet(1,...,1).
  double exponential() { return -std::log1p(-uniform()); }

  std::uint64_t integer() { return gen_(); }

  int index(int n) { return static_cast<int>(gen_() % static_cast<std::uint64_t>(n)); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace otmc
