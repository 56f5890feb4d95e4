// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace rlbp {

/// splitmix64 finalizer; the declared mixing function for deriving per-run
/// seeds, so results do not depend on execution order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Per-run seed for run `index` under a master seed.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master + index * 0x9E3779B97F4A7C15ull);
}

/// Uniform double in [0, 1) from 53 random bits; avoids distribution
/// objects so streams are identical across standard libraries.
inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool coin(std::mt19937_64& rng, double p_true) {
  return unit_double(rng) < p_true;
}

}  // namespace rlbp
