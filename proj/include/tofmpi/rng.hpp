#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace tofmpi {

// SplitMix64 step. Used to expand seeds and to derive per-tree / per-pixel
// streams: DeriveSeed(base, k) = SplitMix64(base + k * golden_gamma).
constexpr std::uint64_t SplitMix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t state = base + stream * 0x9E3779B97F4A7C15ull;
  return SplitMix64(state);
}

// xoshiro256** 1.0 (Blackman & Vigna), seeded by four SplitMix64 outputs.
// Every derived quantity (uniform doubles, bounded integers, normals) is
// defined here so that sample streams do not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = SplitMix64(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return Next(); }

  std::uint64_t Next() {
    const std::uint64_t result = Rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = Rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform01() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform01(); }

  // Unbiased integer in [0, n) by rejection; n must be > 0.
  std::uint64_t UniformIndex(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = Next();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via the Box-Muller transform (cosine branch only).
  double Normal();

  // Fisher-Yates shuffle of [0, n).
  std::vector<std::uint32_t> Permutation(std::uint32_t n);

 private:
  static constexpr std::uint64_t Rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

}  // namespace tofmpi
