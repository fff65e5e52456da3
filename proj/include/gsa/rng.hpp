#pragma once

#include <cstdint>

#include "gsa/dist.hpp"

namespace gsa {

/// xoshiro256** 1.0 (Blackman & Vigna), seeded through splitmix64.
/// Fixed-width integer arithmetic only, so streams are bit-identical
/// across platforms and compilers.
class Xoshiro256StarStar {
 public:
  explicit Xoshiro256StarStar(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      // splitmix64 step
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double strictly inside (0, 1): 53 high bits plus a half-ulp
  /// offset, so quantile transforms never see an endpoint.
  double next_unit() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard-normal draw by inverse-CDF of next_unit(); deterministic,
  /// unlike std::normal_distribution whose stream is implementation-defined.
  double next_gaussian() { return std_normal_quantile(next_unit()); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace gsa
