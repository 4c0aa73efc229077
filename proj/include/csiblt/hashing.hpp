#pragma once

#include <cstdint>

namespace csiblt {

// SplitMix64 step applied to a raw value. Every seeded hash and random
// stream in this library is built from this one mixer, so two hosts that
// share a seed agree bit-for-bit on cell placements and measurement
// matrices without exchanging anything beyond the seed itself.
//
//   mix64(z) = finalize(z + 0x9e3779b97f4a7c15)
//   finalize(v): v ^= v >> 30; v *= 0xbf58476d1ce4e5b9;
//                v ^= v >> 27; v *= 0x94d049bb133111eb;
//                v ^= v >> 31; return v
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based deterministic stream over mix64. Unlike the standard
// library distributions, every draw is specified exactly, so sequences
// are reproducible across compilers and platforms.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    const std::uint64_t r = mix64(state_);
    state_ += 0x9e3779b97f4a7c15ULL;
    return r;
  }

  // Uniform in (0, 1); never returns an endpoint.
  double next_unit() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform in [0, bound) by rejection, bound >= 1.
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    const std::uint64_t rem = (UINT64_MAX % bound + 1) % bound;
    const std::uint64_t limit = UINT64_MAX - rem;
    std::uint64_t v = next();
    while (v > limit) v = next();
    return v % bound;
  }

  // Uniform in [lo, hi], inclusive.
  std::uint64_t next_in(std::uint64_t lo, std::uint64_t hi) noexcept {
    return lo + next_below(hi - lo + 1);
  }

 private:
  std::uint64_t state_;
};

}  // namespace csiblt
