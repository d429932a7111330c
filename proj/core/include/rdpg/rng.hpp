#pragma once

#include <cstdint>

namespace rdpg {

// Counter-based randomness. Every draw is a pure function of
// (seed, stream tag, counters), so sampled objects are identical no matter
// in which order or on how many threads the draws are evaluated.

namespace stream {
inline constexpr std::uint64_t kLatent = 0x4c41544e54ull;    // latent rows
inline constexpr std::uint64_t kEdge = 0x45444745ull;        // adjacency entries
inline constexpr std::uint64_t kOos = 0x4f4f53ull;           // OOS edge vector
inline constexpr std::uint64_t kOosAtom = 0x4f41544dull;     // OOS atom choice
inline constexpr std::uint64_t kTrial = 0x5452494cull;       // Monte Carlo trials
inline constexpr std::uint64_t kEigenInit = 0x45494753ull;   // eigensolver start basis
}  // namespace stream

// SplitMix64 finalizer (Steele, Lea, Flood 2014). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives a child key from (seed, tag) and up to two counters.
constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t tag,
                               std::uint64_t a = 0, std::uint64_t b = 0) noexcept {
  std::uint64_t h = mix64(seed ^ 0x243f6a8885a308d3ull);
  h = mix64(h ^ tag);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  return h;
}

// Uniform double in [0, 1) from 53 high bits of the key.
constexpr double unit_double(std::uint64_t key) noexcept {
  return static_cast<double>(key >> 11) * 0x1.0p-53;
}

}  // namespace rdpg
