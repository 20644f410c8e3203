#pragma once

#include <cstdint>

namespace symplane {

/// Counter-based generator: draw i of stream (seed, stream) is a pure function
/// of the three integers, so results are identical across platforms and
/// independent of draw interleaving between streams.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound) by rejection, bound > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller (no cached second value, so every call
  /// consumes exactly two draws).
  double normal();

  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace symplane
