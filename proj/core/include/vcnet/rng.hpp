#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace vcnet {

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Stable per-task seed stream so task i's draws never depend on task count.
inline uint64_t derive_seed(uint64_t master, uint64_t index) {
  uint64_t s = master ^ (0x9e3779b97f4a7c15ull * (index + 1));
  return splitmix64(s);
}

/// The draws below use explicit arithmetic rather than std distributions so
/// outputs are identical across standard libraries.

template <class Rng> uint64_t bounded(Rng& rng, uint64_t n) {
  return static_cast<uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

template <class Rng> double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <class Rng> double normal01(Rng& rng) {
  double u1;
  do {
    u1 = uniform01(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

template <class Rng> double exponential(Rng& rng, double mean) {
  double u;
  do {
    u = uniform01(rng);
  } while (u >= 1.0);
  return -mean * std::log1p(-u);
}

template <class Rng> uint64_t poisson(Rng& rng, double mean) {
  // inversion by sequential search, fine for small means
  const double limit = std::exp(-mean);
  double p = 1.0;
  uint64_t k = 0;
  do {
    ++k;
    p *= uniform01(rng);
  } while (p > limit);
  return k - 1;
}

template <class T, class Rng> void seeded_shuffle(std::vector<T>& v, Rng& rng) {
  for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(rng, i)]);
}

} // namespace vcnet
