#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace riskbudget {

using Rng = std::mt19937_64;

/// Deterministic seed fan-out: mixes a list of integers (master seed, indices,
/// stream tags) into one 64-bit seed through std::seed_seq.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

// Stream tags keep sub-generators of one seed independent of each other.
enum class Stream : std::uint64_t {
    sample = 1,
    shuffle = 2,
    pilot = 3,
    em_init = 4,
    dgp = 5,
    resample = 6,
    multistart = 7,
    repetition = 8,
};

inline std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                 std::uint64_t index = 0) {
    return derive_seed({seed, static_cast<std::uint64_t>(stream), index});
}

}  // namespace riskbudget
