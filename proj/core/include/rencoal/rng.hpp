#pragma once

#include <cstdint>
#include <random>

namespace rencoal {

using Rng = std::mt19937_64;

/// Seed of the independent stream `index` derived from a base seed.
/// Parallel work items draw from stream_seed(seed, item) so results do not
/// depend on scheduling order.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

inline Rng make_rng(std::uint64_t seed, std::uint64_t index = 0) {
  return Rng(stream_seed(seed, index));
}

}  // namespace rencoal
