#pragma once

#include <cmath>
#include <cstdint>

namespace labeltrick {

/// Counter-based SplitMix64 generator.
///
/// Every draw is a pure integer mix of (seed + counter * golden gamma), so
/// streams are reproducible across platforms and can be split: `split(k)`
/// derives an independent stream keyed by k without disturbing this one.
/// Distributions (uniform, Bernoulli, normal) are implemented here rather
/// than with std::*_distribution, whose output is not specified portably.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed), seed_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1]; safe as a log() argument.
  double next_double_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_double() < p; }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n) {
    // Rejection sampling keeps the draw unbiased for any n.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Standard normal via Box-Muller (uncached; two uniforms per draw).
  double normal() {
    const double u1 = next_double_open();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Independent stream keyed by `stream`; derived from the original seed,
  /// not the current state, so split order does not matter.
  SplitMix64 split(std::uint64_t stream) const {
    std::uint64_t z = seed_ ^ (0x9E3779B97F4A7C15ull * (stream + 1));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return SplitMix64(z ^ (z >> 31));
  }

 private:
  std::uint64_t state_;
  std::uint64_t seed_;
};

}  // namespace labeltrick
