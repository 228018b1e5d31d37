#pragma once

#include <cstdint>
#include <random>

namespace ebm {

// Deterministic uniform generator. std::mt19937_64 output is pinned by the
// standard; the uniform map below avoids std::uniform_real_distribution,
// whose results are implementation-defined, so identical seeds give identical
// streams on every toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ebm
