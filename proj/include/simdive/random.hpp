#pragma once

#include <cmath>
#include <cstdint>

namespace simdive {

/// SplitMix64 (Steele, Lea & Flood). The n-th output depends only on the seed
/// and n, so any element of a stream can be produced directly.
class SplitMix64 {
public:
    static constexpr std::uint64_t gamma = 0x9E3779B97F4A7C15ull;

    constexpr explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t operator()() noexcept {
        state_ += gamma;
        return mix(state_);
    }

    /// Output number `index` (0-based) of the stream seeded with `seed`.
    static constexpr std::uint64_t at(std::uint64_t seed, std::uint64_t index) noexcept {
        return mix(seed + (index + 1) * gamma);
    }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Standard normal deviate (Box-Muller, one of the pair).
    double normal() noexcept {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    std::uint64_t state_;
};

/// Uniform integer in [lo, lo + span) from one 64-bit draw (multiply-high).
constexpr std::uint64_t scale_to_range(std::uint64_t r, std::uint64_t lo, std::uint64_t span) noexcept {
    __extension__ typedef unsigned __int128 u128;
    return lo + static_cast<std::uint64_t>((static_cast<u128>(r) * span) >> 64);
}

} // namespace simdive
