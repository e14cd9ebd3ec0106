#pragma once

#include <cstdint>

namespace cylint::detail {

// SplitMix64 step (Vigna's fixed-increment variant of SplittableRandom).
// Advances the state and returns the mixed output. Used for seeding the
// per-stream engines and for deterministic start vectors in iterative
// eigenvalue routines.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// One-shot mix of a value, without threading state through the caller.
inline std::uint64_t mix64(std::uint64_t x) noexcept {
    std::uint64_t s = x;
    return splitmix64(s);
}

} // namespace cylint::detail
