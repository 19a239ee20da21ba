#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qosalloc {

using Engine = std::mt19937_64;

/// SplitMix64 finaliser; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for an independent substream addressed by (seed, tag, ...).
/// Substreams depend only on their address, never on evaluation order.
inline std::uint64_t substream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

enum class StreamTag : std::uint64_t { kArrivals = 1, kChannel = 2 };

}  // namespace qosalloc
