#pragma once

#include <cstdint>
#include <random>

#include "gibbsperc/geometry.hpp"

namespace gibbsperc {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the `stream`-th child of `seed`. Children of distinct (seed, stream)
/// pairs are statistically independent for all practical purposes.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline Point uniform_point(const Box& box, Rng& rng) {
  Point p(box.dim());
  for (int i = 0; i < box.dim(); ++i) {
    p[i] = std::uniform_real_distribution<double>(box.lower()[i], box.upper()[i])(rng);
  }
  return p;
}

}  // namespace gibbsperc
