// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ptma-oad Authors

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>

namespace ptma {

/// Purposes that get their own independent random stream.
enum class StreamPurpose : std::uint64_t {
  kInit = 1,
  kWindows = 2,
  kEpsilon = 3,
  kSynth = 4,
  kSplit = 5,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ generator. Seeded from a splitmix64 sequence; normal variates
/// use the Box-Muller transform with one cached spare. The exact bit stream is
/// part of the reproducibility contract, so nothing here defers to <random>.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed = 0) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  /// Independent stream for (seed, purpose, index). The three values are
  /// folded through splitmix64 so neighbouring indices decorrelate.
  static Xoshiro256pp stream(std::uint64_t seed, StreamPurpose purpose,
                             std::uint64_t index = 0) {
    std::uint64_t sm = seed;
    std::uint64_t mixed = splitmix64(sm);
    sm = mixed ^ (static_cast<std::uint64_t>(purpose) * 0xD1B54A32D192ED03ULL);
    mixed = splitmix64(sm);
    sm = mixed ^ (index * 0x8CB92BA72F3D8DD7ULL);
    return Xoshiro256pp(splitmix64(sm));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] (inclusive), unbiased by rejection.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo;
    if (span == max()) return next();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = max() - (max() % range) - 1;
    std::uint64_t draw = next();
    while (draw > limit) draw = next();
    return lo + draw % range;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(theta);
    has_spare_ = true;
    return radius * std::cos(theta);
  }

  /// Fisher-Yates, drawing j uniformly from [0, i].
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, i - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4]{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ptma
