#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace wildlong {

// Distribution helpers are spelled out here instead of using <random>'s
// distributions, whose output is implementation-defined. Everything seeded
// through these reproduces bit-for-bit across standard libraries.

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for stream `index` under `base`. Distinct (base, index) pairs give
/// statistically independent mt19937_64 streams.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return mix64(mix64(base) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t base, std::uint64_t index = 0) {
  return Rng(derive_seed(base, index));
}

/// Uniform integer in [0, n). Rejection sampling, no modulo bias. n > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (one draw per call; the pair's twin is discarded).
double standard_normal(Rng& rng);

/// Index drawn with probability proportional to `probs` (assumed normalized).
/// Falls back to the last positive entry if rounding leaves mass uncovered.
std::size_t sample_categorical(Rng& rng, std::span<const double> probs);

/// In-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_index(rng, i)]);
  }
}

}  // namespace wildlong
