#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace spv {

/// Uniform draw in [0, bound) from a 64-bit Mersenne Twister by rejection.
/// std::uniform_int_distribution is implementation-defined, so it would make
/// seeded dropout masks and trial orders differ between standard libraries.
inline std::uint64_t draw_below(std::mt19937_64& gen, std::uint64_t bound)
{
    if (bound <= 1)
        return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
        v = gen();
    } while (v >= limit);
    return v % bound;
}

/// Fisher-Yates shuffle driven by draw_below.
template <typename T>
void seeded_shuffle(std::span<T> items, std::mt19937_64& gen)
{
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(draw_below(gen, i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

} // namespace spv
