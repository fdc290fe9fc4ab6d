// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The bloomprobe Authors

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace bloomprobe {

/// Seeded shuffling used by balancing and splitting.
///
/// The engine is std::mt19937_64 (output fully specified by the C++ standard).
/// Bounded draws use rejection sampling on the raw 64-bit output, so the
/// sequence of swaps is reproducible across standard libraries, unlike
/// std::shuffle / std::uniform_int_distribution.
class Shuffler {
public:
    explicit Shuffler(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Fisher-Yates, walking from the back: for i = n-1 .. 1 swap(i, below(i+1)).
    template <class T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace bloomprobe
