#pragma once

#include <cstdint>

#include "wsn/crypto.hpp"

namespace wsn {

/// SplitMix64 stream. The distribution helpers below are defined here rather
/// than taken from <random> so that draws are identical on every standard
/// library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Independent stream for a (seed, stream id) pair.
  static Rng stream(std::uint64_t seed, std::uint64_t id) {
    return Rng(crypto::detail::mix64(seed ^ crypto::detail::mix64(id + 0x632be59bd9b4e019ULL)));
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return crypto::detail::mix64(state_);
  }

  /// Uniform in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next());
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t r;
    do {
      r = next();
    } while (r >= limit);
    return lo + static_cast<std::int64_t>(r % span);
  }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) {
    if (p <= 0) return false;
    if (p >= 1) return true;
    return uniform01() < p;
  }

 private:
  std::uint64_t state_;
};

}  // namespace wsn
