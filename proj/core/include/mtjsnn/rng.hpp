#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mtjsnn {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for an independent stream identified by a path of indices below a master
// seed, e.g. (seed, {current_point, trial}). Pure function of its inputs, so work
// can be scheduled on any number of threads without changing results.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  return Rng{derive_seed(seed, path)};
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>{0.0, 1.0}(rng); }

}  // namespace mtjsnn
