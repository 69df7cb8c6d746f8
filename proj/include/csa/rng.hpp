#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace csa {

/// Seed used throughout when the caller does not supply one.
inline constexpr std::uint64_t kDefaultSeed = 2022;

/// SplitMix64 finalizer; good avalanche, used to derive substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a key tuple.
/// Order-sensitive: derive_seed(s, {1, 2}) != derive_seed(s, {2, 1}).
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t p : parts) h = splitmix64(h ^ p);
  return h;
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

/// Uniform draw in [0, n) straight from the raw engine output (unbiased
/// rejection over full multiples of n), independent of any library
/// distribution implementation.
inline std::uint64_t bounded_uint(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace csa
