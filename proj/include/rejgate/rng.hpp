#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace rejgate {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Engine seed for logical stream `stream` of a run seeded with `seed`.
// Streams with different indices are independent regardless of evaluation
// order, which is what makes parallel sweeps reproducible.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

inline std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64{mix_seed(seed, stream)};
}

// Bounded draw in [0, n) via multiply-shift; bit-identical on every platform
// for a given engine state, unlike std::uniform_int_distribution.
inline std::size_t bounded_index(std::mt19937_64& rng, std::size_t n) {
  const auto wide = static_cast<unsigned __int128>(rng()) * static_cast<unsigned __int128>(n);
  return static_cast<std::size_t>(wide >> 64);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Fisher-Yates with an explicit engine, so shuffles are a pure function of
// (items, seed, stream).
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed, std::uint64_t stream) {
  auto rng = seeded_engine(seed, stream);
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[bounded_index(rng, i)]);
  }
}

}  // namespace rejgate
