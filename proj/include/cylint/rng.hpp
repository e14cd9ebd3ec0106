#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include "cylint/detail/splitmix.hpp"
#include "cylint/errors.hpp"

namespace cylint {

namespace detail {

inline std::uint64_t rotl64(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

/// xoshiro256++ core generator. State must never be all zero.
struct Xoshiro256pp {
    std::uint64_t s[4];

    std::uint64_t next() noexcept {
        const std::uint64_t result = rotl64(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl64(s[3], 45);
        return result;
    }
};

inline std::uint64_t fnv1a64(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace detail

/// Deterministic seed for a named sub-experiment, so separate checks within
/// one run never share replica streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) noexcept {
    return detail::mix64(seed ^ detail::fnv1a64(label));
}

/// One independent pseudorandom stream, identified by a key derived from a
/// master seed and a stream id. Streams with distinct (seed, id) pairs are
/// statistically independent, and a stream's sequence depends only on its
/// key, never on how many other streams exist or in what order they run.
///
/// substream(purpose) derives a child stream from the parent's key alone,
/// so re-deriving the same substream always replays the same sequence
/// regardless of what the parent has consumed.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : RngStream(derive_key(master_seed, stream_id)) {}

    [[nodiscard]] RngStream substream(std::uint64_t purpose) const {
        return RngStream(derive_key(key_, purpose));
    }

    [[nodiscard]] RngStream substream(std::string_view purpose) const {
        return substream(detail::fnv1a64(purpose));
    }

    std::uint64_t key() const noexcept { return key_; }

    std::uint64_t next_u64() noexcept { return gen_.next(); }

    /// Uniform draw in [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>(gen_.next() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller, consuming exactly two uniforms per
    /// call (no cached spare, so consumption counts stay predictable).
    double normal() noexcept {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(2.0 * pi * u2);
    }

    /// Poisson count by inversion of exponential waiting times. Large means
    /// are split into chunks of at most 20 and summed, which keeps each
    /// chunk's acceptance threshold comfortably above underflow.
    std::uint64_t poisson(double mean) {
        if (!(mean >= 0.0) || !std::isfinite(mean))
            throw invalid_input("poisson: mean must be finite and nonnegative");
        std::uint64_t total = 0;
        while (mean > 20.0) {
            total += poisson_small(20.0);
            mean -= 20.0;
        }
        return total + poisson_small(mean);
    }

private:
    static constexpr double pi = 3.141592653589793238462643383279502884;

    explicit RngStream(std::uint64_t key) : key_(key) {
        std::uint64_t st = key_;
        for (auto& word : gen_.s) word = detail::splitmix64(st);
        if ((gen_.s[0] | gen_.s[1] | gen_.s[2] | gen_.s[3]) == 0) gen_.s[0] = 1;
    }

    static std::uint64_t derive_key(std::uint64_t parent, std::uint64_t id) noexcept {
        return detail::mix64(parent ^ detail::mix64(id ^ 0x517cc1b727220a95ull));
    }

    std::uint64_t poisson_small(double mean) noexcept {
        const double threshold = std::exp(-mean);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > threshold);
        return k - 1;
    }

    std::uint64_t key_;
    detail::Xoshiro256pp gen_;
};

} // namespace cylint
