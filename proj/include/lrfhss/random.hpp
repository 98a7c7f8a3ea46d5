#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace lrfhss {

using Rng = std::mt19937_64;

/// Independent generator for one unit of work (trial, realization, ...),
/// derived deterministically from the experiment seed and a path of indices.
inline Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * path.size());
    auto push = [&](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    for (auto p : path) push(p);
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

}  // namespace lrfhss
