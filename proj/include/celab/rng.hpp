// ce-lab: seeded random streams with a fixed, engine-portable variate
// definition so that trajectories and Monte Carlo runs replay bit-for-bit.
// SPDX-License-Identifier: MIT
#ifndef CELAB_RNG_HPP
#define CELAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace celab {

/// One splitmix64 step; used to derive independent sub-streams from a user
/// seed without correlating nearby seed values.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for the `index`-th sub-stream of `seed` (simulation vs sampling vs
/// per-sample search streams stay disjoint and order-independent).
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

/// Deterministic variate source. std::mt19937_64 has a fully specified
/// output sequence, and the mappings below avoid the implementation-defined
/// std::*_distribution adapters, so streams are identical across platforms.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Standard normal via the Box-Muller cosine branch. Each variate consumes
  /// exactly two engine draws; there is no cached spare, so the stream
  /// position after n variates is 2n draws regardless of call pattern.
  double normal() {
    double u1 = static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;  // (0,1]
    double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;        // [0,1)
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::mt19937_64 eng_;
};

}  // namespace celab

#endif  // CELAB_RNG_HPP
