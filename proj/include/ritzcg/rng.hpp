#pragma once

#include <cmath>
#include <cstdint>

#include "ritzcg/types.hpp"

namespace ritzcg {

/**
 * Deterministic counter-based random generator.
 *
 * Each draw mixes (seed, stream, counter) through SplitMix64, so a given
 * seed produces bit-identical sequences on any platform with IEEE doubles.
 * Gaussians use the Box-Muller transform. The algorithm identity recorded
 * in run manifests is "splitmix64-boxmuller-v1".
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  static const char* algorithm() { return "splitmix64-boxmuller-v1"; }

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ ^ (0x9E3779B97F4A7C15ULL * (stream_ + 1));
    z += 0x9E3779B97F4A7C15ULL * ++counter_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal draw.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    constexpr double two_pi = 6.283185307179586476925286766559;
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = two_pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  Vector normal_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Vector uniform_vector(Index n, double lo, double hi) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ritzcg
