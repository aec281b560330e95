#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nsgeo::rng {

// All randomness in a run flows from one base seed through named sub-streams,
// so results are reproducible regardless of evaluation order or thread count.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) {
  std::uint64_t h = seed ^ 0x6a09e667f3bcc909ULL;
  for (char c : stream) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h = splitmix64(h);
  }
  h ^= index;
  return splitmix64(h);
}

inline std::mt19937_64 engine(std::uint64_t seed, std::string_view stream, std::uint64_t index = 0) {
  return std::mt19937_64(derive(seed, stream, index));
}

}  // namespace nsgeo::rng
