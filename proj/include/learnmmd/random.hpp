#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace learnmmd {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent child seeds from a master
// seed so results do not depend on scheduling order.
std::uint64_t mix_seed(std::uint64_t value);

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t substream);

// Uniformly random permutation of 0..n-1.
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

}  // namespace learnmmd
