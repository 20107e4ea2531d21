#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace advens {

using Rng = std::mt19937_64;

// Mixes a run seed with a path of identifiers (epoch, example index, ...) into an
// independent substream seed. Results never depend on evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
  return Rng(derive_seed(seed, path));
}

// Uniform double in [0, 1) built from the top 53 bits; identical across standard libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n) via rejection; identical across standard libraries.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

// Standard normal draw (Box-Muller over uniform01).
double standard_normal(Rng& rng);

template <typename It>
void shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = uniform_index(rng, i);
    std::swap(first[i - 1], first[j]);
  }
}

}  // namespace advens
