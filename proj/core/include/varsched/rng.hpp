#pragma once

#include <cstdint>
#include <random>

namespace varsched {

// Derives an independent, reproducible generator for (seed, stream). Used
// wherever a component needs randomness keyed on something other than the
// top-level seed (restart number, round, job id...).
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace varsched
