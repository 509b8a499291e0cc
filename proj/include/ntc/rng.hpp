#pragma once

#include <cstdint>
#include <random>

namespace ntc {

// Deterministic generator backing every seeded decision in the project
// (parameter init, shuffles, dropout masks, negative sampling).
//
// Contract: mt19937_64 seeded directly with the 64-bit seed; doubles are
// built from the top 53 bits of one draw. Identical seeds replay the same
// sequence on every platform, which is what makes splits and checkpoints
// byte-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), unbiased via rejection. n must be > 0.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace ntc
