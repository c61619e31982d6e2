#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace techcast {

using Rng = std::mt19937_64;

/// Unbiased draw from [0, bound) by rejection. Unlike
/// std::uniform_int_distribution this is identical across standard libraries.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
    const std::uint64_t limit = Rng::max() - (Rng::max() % bound + 1) % bound;
    std::uint64_t x = rng();
    while (x > limit) x = rng();
    return x % bound;
}

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace techcast
