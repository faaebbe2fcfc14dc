#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lanebench {

// splitmix64 finalizer; used to derive stream seeds from (seed, payload) pairs.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Uniform double in [0, 1) with 53 random bits; avoids distribution objects so
// results are identical across standard library implementations.
inline double uniform01(std::mt19937_64& g) {
  return std::ldexp(static_cast<double>(g() >> 11), -53);
}

inline double uniform_in(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

// Unbiased integer in [0, n) via rejection.
inline std::size_t uniform_index(std::mt19937_64& g, std::size_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v = g();
  while (v >= limit) v = g();
  return static_cast<std::size_t>(v % n);
}

// One Box-Muller draw (the cosine branch); deterministic across platforms.
inline double standard_normal(std::mt19937_64& g) {
  double u1 = uniform01(g);
  double u2 = uniform01(g);
  if (u1 <= 0.0) u1 = 0x1p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace lanebench
