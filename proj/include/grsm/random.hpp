#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace grsm {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate structured seed tuples.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Order-sensitive hash of a seed tuple, e.g. (master, snr_index, trial_index).
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x6A09E667F3BCC908ULL;
  for (const auto p : parts) {
    h = mix64(h ^ mix64(p));
  }
  return h;
}

inline Rng make_rng(std::initializer_list<std::uint64_t> parts) {
  return Rng{derive_seed(parts)};
}

// Domain tags keep independent streams apart when they share the other indices.
enum class StreamTag : std::uint64_t {
  Trial = 0x7472,
  Channel = 0x6368,
  Alpha = 0x616c,
  PnVariance = 0x706e,
};

constexpr std::uint64_t tag(StreamTag t) noexcept { return static_cast<std::uint64_t>(t); }

}  // namespace grsm
