#pragma once

// Project-wide pseudo random number generation.
//
// Every random stream in the project is a Xoshiro256** generator whose state
// is expanded from a single 64-bit seed by SplitMix64. Per-run seeds are
// derived from a master seed with a fixed mixing function, so a run's stream
// depends only on (master_seed, run_index) and never on thread scheduling.
//
// Reference: D. Blackman, S. Vigna, "Scrambled linear pseudorandom number
// generators", ACM TOMS 2021.

#include <array>
#include <cstdint>
#include <limits>

namespace kappa {

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

/// Xoshiro256**. Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256(std::uint64_t seed) noexcept : s_{} {
    SplitMix64 sm(seed);
    for (auto& word : s_) word = sm.next();
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_;
};

/// Uniform draw on the open interval (0, 1): the 53 high bits, offset by half a step.
inline double uniform_open01(Xoshiro256& rng) noexcept {
  constexpr double kStep = 0x1.0p-53;
  return (static_cast<double>(rng() >> 11) + 0.5) * kStep;
}

/// Seed of run `run_index` under `master_seed`. Injective in each argument
/// with the other held fixed: mix64 is a bijection and xor with a fixed word is too.
constexpr std::uint64_t derive_run_seed(std::uint64_t master_seed,
                                        std::uint64_t run_index) noexcept {
  return mix64(mix64(master_seed) ^ run_index);
}

}  // namespace kappa
