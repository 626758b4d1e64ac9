#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mwmc::rng {

/// Counter-based generator built on the SplitMix64 finalizer.
///
/// Every draw is a pure function of (seed, counters), so results do not
/// depend on evaluation order. The same entry produces the same bits from
/// a serial loop, an OpenMP loop, or a re-run with the same seed.
inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Hash-combine used everywhere seeds are derived from structured inputs.
inline std::uint64_t combine(std::uint64_t h, std::uint64_t v) noexcept {
  return splitmix64(h ^ (v + kGolden + (h << 6) + (h >> 2)));
}

inline std::uint64_t key(std::uint64_t seed, std::uint64_t i, std::uint64_t j,
                         std::uint64_t stream) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = combine(h, i);
  h = combine(h, j);
  h = combine(h, stream);
  return h;
}

/// Uniform draw in [0, 1) from the top 53 bits of the key.
inline double uniform01(std::uint64_t seed, std::uint64_t i, std::uint64_t j,
                        std::uint64_t stream) noexcept {
  return static_cast<double>(key(seed, i, j, stream) >> 11) * 0x1.0p-53;
}

/// Standard normal draw via Box-Muller on two decorrelated uniform streams.
inline double gaussian(std::uint64_t seed, std::uint64_t i, std::uint64_t j,
                       std::uint64_t stream) noexcept {
  const double u1 = uniform01(seed, i, j, 2 * stream);
  const double u2 = uniform01(seed, i, j, 2 * stream + 1);
  return std::sqrt(-2.0 * std::log1p(-u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

/// Stream ids; keeping them in one place avoids accidental reuse.
enum Stream : std::uint64_t {
  kMask = 1,
  kNoise = 2,
  kLeftFactor = 3,
  kRightFactor = 4,
  kPerturbation = 5,
  kPriorComplement = 6,
  kPriorTail = 7,
  kTestStream = 100,
};

}  // namespace mwmc::rng
