#pragma once

// Multiply blending, 3x3 Gaussian smoothing and additive Gaussian noise.

#include <simdive/apps/image.hpp>
#include <simdive/apps/units.hpp>
#include <simdive/random.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace simdive {

/// out = floor(mul(a, b) / 255), saturated at 255.
inline GrayImage blend(const GrayImage& a, const GrayImage& b, const Multiplier8& mul) {
    require_same_shape(a, b);
    GrayImage out(a.width, a.height);
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        out.pixels[i] = static_cast<std::uint8_t>(std::min<std::uint32_t>(255, mul(a.pixels[i], b.pixels[i]) / 255));
    }
    return out;
}

enum class SmoothMode : std::uint8_t {
    exact,    ///< exact multiplier and divider
    div_only, ///< exact multiplier, approximate divider
    hybrid,   ///< approximate multiplier and divider
};

inline const char* to_string(SmoothMode m) noexcept {
    return m == SmoothMode::exact ? "exact" : m == SmoothMode::div_only ? "div-only" : "hybrid";
}

inline SmoothMode parse_smooth_mode(const std::string& s) {
    for (SmoothMode m : {SmoothMode::exact, SmoothMode::div_only, SmoothMode::hybrid}) {
        if (s == to_string(m)) {
            return m;
        }
    }
    throw std::invalid_argument("unknown smoothing mode '" + s + "' (expected exact, div-only or hybrid)");
}

/// Arithmetic for one smoothing run: which units the mode swaps in.
struct SmoothUnits {
    Multiplier8 mul;
    Divider16x8 div;

    static constexpr unsigned quotient_frac_bits = 4;

    static SmoothUnits make(SmoothMode mode, Unit approx = Unit::corrected, unsigned region_bits = 3, unsigned coeff_bits = 6) {
        const Unit mu = mode == SmoothMode::hybrid ? approx : Unit::exact;
        const Unit du = mode == SmoothMode::exact ? Unit::exact : approx;
        return {Multiplier8{mu, region_bits, coeff_bits}, Divider16x8{du, quotient_frac_bits, region_bits, coeff_bits}};
    }
};

/// 3x3 [1 2 1; 2 4 2; 1 2 1] kernel with replicate-edge padding. The weighted
/// sum runs through the multiplier, the division by 16 through the divider with
/// 4 quotient fraction bits, and the quotient is rounded to an 8-bit intensity.
inline GrayImage gaussian_smooth(const GrayImage& img, const SmoothUnits& units) {
    if (img.width < 3 || img.height < 3) {
        throw std::invalid_argument("gaussian_smooth needs an image of at least 3x3");
    }
    static constexpr std::array<std::array<std::uint8_t, 3>, 3> kernel{{{1, 2, 1}, {2, 4, 2}, {1, 2, 1}}};
    constexpr unsigned q = SmoothUnits::quotient_frac_bits;
    GrayImage out(img.width, img.height);
    const int w = static_cast<int>(img.width);
    const int h = static_cast<int>(img.height);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint32_t sum = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const auto px = static_cast<unsigned>(std::clamp(x + dx, 0, w - 1));
                    const auto py = static_cast<unsigned>(std::clamp(y + dy, 0, h - 1));
                    sum += units.mul(kernel[dy + 1][dx + 1], img.at(px, py));
                }
            }
            const std::uint64_t quotient = *units.div(static_cast<std::uint16_t>(std::min<std::uint32_t>(sum, 0xFFFF)), 16);
            const std::uint64_t rounded = (quotient + (1u << (q - 1))) >> q;
            out.at(static_cast<unsigned>(x), static_cast<unsigned>(y)) = static_cast<std::uint8_t>(std::min<std::uint64_t>(rounded, 255));
        }
    }
    return out;
}

/// Adds round(sigma * N(0,1)) to every pixel, clamped to [0, 255].
inline GrayImage add_gaussian_noise(const GrayImage& img, double sigma, std::uint64_t seed) {
    SplitMix64 rng(seed);
    GrayImage out = img;
    for (auto& p : out.pixels) {
        const long v = std::lround(p + sigma * rng.normal());
        p = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
    }
    return out;
}

} // namespace simdive
