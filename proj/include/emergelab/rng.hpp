#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace emergelab {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for a named substream. Every random component derives its generator
// from the run seed through this, so adding a stream never shifts another.
inline std::uint64_t substream_seed(std::uint64_t seed, std::string_view name,
                                    std::uint64_t index = 0) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return splitmix64(splitmix64(seed ^ h) + index);
}

inline Rng substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
  return Rng(substream_seed(seed, name, index));
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace emergelab
