#include "riskbudget/rng.hpp"

#include <array>
#include <vector>

namespace riskbudget {

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
    std::vector<std::uint32_t> words;
    words.reserve(2 * parts.size());
    for (std::uint64_t p : parts) {
        words.push_back(static_cast<std::uint32_t>(p & 0xffffffffULL));
        words.push_back(static_cast<std::uint32_t>(p >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

}  // namespace riskbudget
