// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#include "bloomprobe/rng.hpp"

#include <limits>

namespace bloomprobe {

std::uint64_t Shuffler::below(std::uint64_t bound) {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    // 2^64 mod bound; draws in the top `excess` values are rejected.
    const std::uint64_t excess = (kMax % bound + 1) % bound;
    std::uint64_t x = engine_();
    if (excess == 0) return x % bound;
    const std::uint64_t limit = kMax - excess + 1;
    while (x >= limit) x = engine_();
    return x % bound;
}

}  // namespace bloomprobe
