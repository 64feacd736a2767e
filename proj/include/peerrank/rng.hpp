#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace peerrank {

/// splitmix64 (Steele, Lea, Flood). Chosen over std engines because its
/// output sequence is fully specified, so seeded runs are reproducible
/// across compilers and platforms.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, bound). Rejection-free modulo is fine here: bounds are
  /// tiny (candidate counts), so the bias is far below observable levels,
  /// but use Lemire-style rejection anyway to keep draws exact.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

/// Deterministic seed derivation: mixes each component through splitmix so
/// that, e.g., per-question streams are independent of iteration order.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> parts) {
  SplitMix64 mix(seed);
  std::uint64_t h = mix.next();
  for (std::uint64_t p : parts) {
    SplitMix64 m2(h ^ (p + 0x9E3779B97F4A7C15ULL));
    h = m2.next();
  }
  return h;
}

/// Standard normal deviate keyed by an arbitrary 64-bit value
/// (counter-based: evaluation order never affects the draw).
/// Box-Muller on two splitmix outputs.
inline double standard_normal(std::uint64_t key) {
  SplitMix64 g(key);
  const double u1 =
      (static_cast<double>(g.next() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(g.next() >> 11) * 0x1.0p-53;  // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Fisher-Yates shuffle of 0..n-1 driven by a SplitMix64 stream.
inline std::vector<std::size_t> shuffled_indices(std::size_t n,
                                                 std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  SplitMix64 g(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(g.below(i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace peerrank
