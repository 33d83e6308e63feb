#pragma once

#include <cstdint>
#include <random>

namespace clab {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to turn (seed, counter) pairs into well-mixed
// stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Seed of the `counter`-th independent stream derived from `seed`. Stream t of
// a Monte-Carlo run is always seeded the same way regardless of how many
// streams are requested, so extending a run never changes earlier trials.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(counter + 0x632BE59BD9B4E019ull));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t counter) {
  return Rng(derive_seed(seed, counter));
}

// Uniform index in [0, n). Avoids std::uniform_int_distribution so the
// sequence is identical across standard library implementations.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  // Lemire's multiply-shift; bias is below 2^-64 * n and irrelevant here.
  const unsigned __int128 product = static_cast<unsigned __int128>(rng()) * n;
  return static_cast<std::size_t>(product >> 64);
}

}  // namespace clab
