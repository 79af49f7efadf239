#pragma once

#include <cstdint>
#include <random>

namespace tdmc {

using Rng = std::mt19937_64;

// Purpose tags keep the streams of different consumers disjoint even when they
// share a master seed and an index.
enum class StreamTag : std::uint32_t {
  chain = 1,
  oracle = 2,
  hidden_path = 3,
  observations = 4,
  filter = 5,
  test = 99,
};

// Counter scheme: the generator is seeded from the 32-bit words
// (seed_lo, seed_hi, index_lo, index_hi, tag, salt) through std::seed_seq.
// Every (seed, index, tag, salt) tuple names an independent stream, so a replica's
// draws never depend on how replicas are scheduled across threads.
Rng make_stream(std::uint64_t seed, std::uint64_t index, StreamTag tag, std::uint32_t salt = 0);

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace tdmc
