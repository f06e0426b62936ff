#pragma once

#include <cassert>
#include <cstdint>
#include <limits>

namespace cavex {

// splitmix64 finalizer; used to derive independent sub-seeds from one run seed
// so that e.g. secret draws and weight init never share a stream.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed + 0x9e3779b97f4a7c15ull * (stream + 1));
}

// Uniform double in [0, 1) with 53 random bits. Avoids the
// implementation-defined std::uniform_real_distribution so that seeded runs
// reproduce across standard libraries.
template <class Rng>
double uniform_real01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Unbiased integer in [0, n) via rejection sampling.
template <class Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  assert(n > 0);
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

}  // namespace cavex
