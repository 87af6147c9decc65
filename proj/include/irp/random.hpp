#pragma once

// Seed derivation and seeded Gaussian fills.

#include <cstdint>
#include <random>

#include "irp/spaces.hpp"

namespace irp {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the i-th member of a family: splitmix64(master ^ splitmix64(i)).
/// Pure integer arithmetic, identical on every platform.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t i) { return splitmix64(master ^ splitmix64(i)); }

/// Uniform index in [0, k) from a seed (multiply-shift reduction).
inline Index draw_index(std::uint64_t seed, Index k) {
  const auto r = static_cast<unsigned __int128>(splitmix64(seed)) * static_cast<unsigned __int128>(k);
  return static_cast<Index>(r >> 64);
}

inline Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed, double stddev = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(rows, cols);
  // Row-major fill so the stream order does not depend on storage order.
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

}  // namespace irp
