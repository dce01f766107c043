#pragma once

#include <cstdint>
#include <random>

namespace epiland {

using Rng = std::mt19937_64;

/// Generator for stream `index` of `master_seed`.
///
/// The seed of each stream is a SplitMix64 hash of the (seed, index) pair, so
/// stream k never depends on how many other streams were created or in which
/// order. Ensembles use the trajectory index as the stream index.
Rng make_stream(std::uint64_t master_seed, std::uint64_t index);

}  // namespace epiland
