// Copyright (c) 2026 cfesched contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace cfe {

// SplitMix64 (Steele/Lea/Flood reference constants). Every random draw in the
// project goes through this generator so that corpora and training runs can be
// regenerated bit-identically from a seed, in any language, without relying on
// implementation-defined standard-library distributions.
struct SplitMix64 {
  std::uint64_t state = 0;

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53-bit resolution
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // uniform integer in [lo, hi]; modulo reduction, bias < 2^-57 for the spans
  // used here (band widths of at most a few dozen values)
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    return lo + next() % (hi - lo + 1);
  }

  // standard normal via Box-Muller; no cached spare, so the draw order is one
  // normal per two uniforms and stays easy to reproduce
  double gaussian() {
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586477 * u2);
  }
};

// 64-bit avalanche finaliser (same mixing as SplitMix64's output stage).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Decorrelated substream for a counter pair (a, b) under one master seed.
// substream(seed, a, b) is what makes generation splittable: workflow #i of
// level L always sees the same stream no matter what was drawn before it.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t a,
                            std::uint64_t b = 0) {
  return SplitMix64{mix64(mix64(seed + 0x9E3779B97F4A7C15ULL * (a + 1)) +
                          0x9E3779B97F4A7C15ULL * (b + 1))};
}

}  // namespace cfe
