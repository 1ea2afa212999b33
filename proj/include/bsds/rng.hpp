#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace bsds {

// SplitMix64 step; the standard finalizer keeps derived streams decorrelated.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic, platform-independent generator (xoshiro256**).
/// Distributions below are hand-rolled so that identical seeds give
/// identical draws on every standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  std::uint64_t next_u64() {
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

  /// Uniform in [0, 1) with 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound), bound > 0; rejection sampling, unbiased.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Standard normal via Box-Muller (uses two uniforms per pair).
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = next_double();
    } while (u1 <= 0.0);
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * u2);
    have_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4] = {};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Derives one stream key from an ordered list of components
/// (master seed, replicate index, proposer index, budget index, purpose...).
/// Pure counter construction: the same components always give the same key,
/// so any execution schedule reproduces the same draws.
inline std::uint64_t derive_stream(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t state = 0x8f1bbcdcbfa53e0bULL;
  for (std::uint64_t p : parts) {
    state ^= splitmix64(state) ^ p;
    (void)splitmix64(state);
  }
  return splitmix64(state);
}

// Fixed purpose tags for derive_stream.
namespace stream_purpose {
constexpr std::uint64_t resample = 1;
constexpr std::uint64_t knowledge_base = 2;
constexpr std::uint64_t proposer = 3;
constexpr std::uint64_t trainer = 4;
constexpr std::uint64_t synthetic = 5;
}  // namespace stream_purpose

}  // namespace bsds
