#pragma once

#include <cstdint>
#include <random>

namespace crp {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for sub-stream `index` of `seed`. Streams are a pure function of
/// (seed, index) so work can be split across threads in any order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(derive_seed(seed, index));
}

}  // namespace crp
