#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace rbandit {

/// SplitMix64: a 64-bit counter-based generator (Weyl increment plus a
/// finalizing hash). Every consumer in this project draws from its own
/// stream, derived deterministically from (seed, purpose) via
/// make_stream(), so environment noise, exploration coins, context draws
/// and the region sampler never interleave.
///
/// Draw contract (tests rely on it):
///   next_u64 / next_unit  consume exactly one raw value,
///   next_gaussian         consumes exactly two raw values.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller.
  double next_gaussian() {
    const double u1 =
        (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(next_unit() * static_cast<double>(n)) % n;
  }

 private:
  std::uint64_t state_;
};

enum class Stream : std::uint64_t {
  env_noise = 1,
  agent_explore = 2,
  context_draw = 3,
  region_sampler = 4,
};

/// Deterministic stream splitting: the purpose tag is folded into the seed
/// through the SplitMix64 finalizer chain itself.
inline SplitMix64 make_stream(std::uint64_t seed, Stream purpose) {
  SplitMix64 mixer(seed);
  const std::uint64_t a = mixer.next_u64();
  SplitMix64 mixer2(a ^ (static_cast<std::uint64_t>(purpose) * 0xD1342543DE82EF95ULL));
  return SplitMix64(mixer2.next_u64());
}

}  // namespace rbandit
