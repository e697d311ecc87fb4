#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "penetrance/common.hpp"

namespace penetrance {

// All randomness in the project flows from a single user seed through named
// substreams, so that e.g. family #7 of a simulated cohort gets the same
// stream regardless of how many worker threads are running.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name,
                                 std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(fnv1a64(name)),
                    static_cast<std::uint32_t>(fnv1a64(name) >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace penetrance
