#include "tdmc/rng.hpp"

namespace tdmc {

Rng make_stream(std::uint64_t seed, std::uint64_t index, StreamTag tag, std::uint32_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(tag), salt};
  return Rng(seq);
}

}  // namespace tdmc
