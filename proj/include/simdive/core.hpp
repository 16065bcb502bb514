#pragma once

// Exact reference arithmetic and the uncorrected Mitchell logarithmic
// multiplier / divider, bit-accurate at 8, 16 and 32 bits.
//
// An operand A = 2^k (1 + x) is held as its leading-one position k and the
// bits below the leading one left-aligned in an F = width-1 bit fraction
// register. Multiplication adds (k, x) pairs, division subtracts them, and
// the shift-based antilog rebuilds the integer result, truncating toward zero.

#include <simdive/word.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>

namespace simdive {

__extension__ typedef unsigned __int128 uint128_t;

/// Output of the 4-bit leading-one detector.
struct LodSegmentResult {
    bool zero_flag = true;
    unsigned position = 0; ///< 0..3, meaningful only when !zero_flag

    friend constexpr bool operator==(const LodSegmentResult&, const LodSegmentResult&) noexcept = default;
};

/// Leading-one detector for one nibble.
constexpr LodSegmentResult lod_segment(unsigned nibble) {
    if (nibble > 0xF) {
        throw std::out_of_range("lod_segment expects a 4-bit value");
    }
    if (nibble == 0) {
        return {true, 0};
    }
    unsigned pos = nibble & 0x8 ? 3u : nibble & 0x4 ? 2u : nibble & 0x2 ? 1u : 0u;
    return {false, pos};
}

/// Most-significant set bit by direct scan. Empty for zero.
constexpr std::optional<unsigned> msb_scan(std::uint64_t v) noexcept {
    if (v == 0) {
        return std::nullopt;
    }
    unsigned k = 0;
    while (v >>= 1) {
        ++k;
    }
    return k;
}

/// Leading-one position composed from per-nibble detectors: the most
/// significant non-zero segment supplies the position. Empty for zero.
constexpr std::optional<unsigned> leading_one(UIntWord a) noexcept {
    const unsigned segments = bits(a.width()) / 4;
    for (unsigned s = segments; s-- > 0;) {
        const auto seg = lod_segment((a.value() >> (4 * s)) & 0xF);
        if (!seg.zero_flag) {
            return 4 * s + seg.position;
        }
    }
    return std::nullopt;
}

/// Approximate base-2 logarithm k + x of an operand.
struct LogApprox {
    unsigned k = 0;
    std::uint32_t frac_bits = 0; ///< x scaled by 2^fraction_width
    unsigned fraction_width = 0;
    bool is_zero = true;

    double fraction() const noexcept { return static_cast<double>(frac_bits) / static_cast<double>(std::uint64_t{1} << fraction_width); }

    friend constexpr bool operator==(const LogApprox&, const LogApprox&) noexcept = default;
};

constexpr LogApprox log_approx(UIntWord a) noexcept {
    const unsigned f = fraction_bits(a.width());
    const auto k = leading_one(a);
    if (!k) {
        return {0, 0, f, true};
    }
    const std::uint32_t below = a.value() - (std::uint32_t{1} << *k);
    return {*k, below << (f - *k), f, false};
}

namespace detail {

/// floor(2^(exponent + out_frac) * (1 + frac / 2^frac_width)).
/// Saturates at the maximum uint128 value; callers clamp long before that.
constexpr uint128_t antilog_floor(int exponent, std::uint64_t frac, unsigned frac_width, unsigned out_frac) noexcept {
    const uint128_t mant = (uint128_t{1} << frac_width) + frac;
    const int shift = exponent + static_cast<int>(out_frac) - static_cast<int>(frac_width);
    if (shift >= 0) {
        if (shift >= 128 - static_cast<int>(frac_width) - 2) {
            return std::numeric_limits<uint128_t>::max();
        }
        return mant << shift;
    }
    if (-shift >= 127) {
        return 0;
    }
    return mant >> -shift;
}

inline void require_same_width(UIntWord a, UIntWord b) {
    if (a.width() != b.width()) {
        throw std::invalid_argument("operands must share a width");
    }
}

/// Divisor widened to the dividend's width; narrower divisors (16/8) are allowed.
inline UIntWord align_divisor(UIntWord dividend, UIntWord divisor) {
    if (bits(divisor.width()) > bits(dividend.width())) {
        throw std::invalid_argument("divisor wider than dividend");
    }
    return divisor.zero_extend(dividend.width());
}

} // namespace detail

inline std::uint64_t exact_mul(UIntWord a, UIntWord b) {
    detail::require_same_width(a, b);
    return std::uint64_t{a.value()} * b.value();
}

/// floor(dividend * 2^quotient_frac_bits / divisor); empty on division by zero.
inline std::optional<std::uint64_t> exact_div(UIntWord dividend, UIntWord divisor, unsigned quotient_frac_bits = 0) {
    detail::align_divisor(dividend, divisor);
    if (quotient_frac_bits > 32) {
        throw std::invalid_argument("quotient_frac_bits must be <= 32");
    }
    if (divisor.value() == 0) {
        return std::nullopt;
    }
    return (std::uint64_t{dividend.value()} << quotient_frac_bits) / divisor.value();
}

/// Mitchell multiplier. Result fits 2*width bits and never exceeds the exact product.
inline std::uint64_t mitchell_mul(UIntWord a, UIntWord b) {
    detail::require_same_width(a, b);
    const LogApprox la = log_approx(a);
    const LogApprox lb = log_approx(b);
    if (la.is_zero || lb.is_zero) {
        return 0;
    }
    const unsigned f = la.fraction_width;
    const int ks = static_cast<int>(la.k + lb.k);
    const std::uint64_t xs = std::uint64_t{la.frac_bits} + lb.frac_bits; // F+1 bits
    const std::uint64_t one = std::uint64_t{1} << f;
    if (xs < one) {
        // 2^(k1+k2) (1 + x1 + x2)
        return static_cast<std::uint64_t>(detail::antilog_floor(ks, xs, f, 0));
    }
    // 2^(k1+k2+1) (x1 + x2), with x1 + x2 = 1 + (xs - one)
    return static_cast<std::uint64_t>(detail::antilog_floor(ks + 1, xs - one, f, 0));
}

/// Mitchell divider. Returns floor(D~ * 2^quotient_frac_bits); 0 when that is
/// below one; empty on division by zero. A narrower divisor is zero-extended.
inline std::optional<std::uint64_t> mitchell_div(UIntWord dividend, UIntWord divisor, unsigned quotient_frac_bits = 0) {
    const UIntWord d = detail::align_divisor(dividend, divisor);
    if (quotient_frac_bits > 32) {
        throw std::invalid_argument("quotient_frac_bits must be <= 32");
    }
    if (d.value() == 0) {
        return std::nullopt;
    }
    const LogApprox la = log_approx(dividend);
    const LogApprox lb = log_approx(d);
    if (la.is_zero) {
        return 0;
    }
    const unsigned f = la.fraction_width;
    const int kd = static_cast<int>(la.k) - static_cast<int>(lb.k);
    const std::int64_t xd = std::int64_t{la.frac_bits} - std::int64_t{lb.frac_bits};
    if (xd >= 0) {
        // 2^(k1-k2) (1 + x1 - x2)
        return static_cast<std::uint64_t>(detail::antilog_floor(kd, static_cast<std::uint64_t>(xd), f, quotient_frac_bits));
    }
    // 2^(k1-k2-1) (2 + x1 - x2), with 2 + x1 - x2 = 1 + (1 + xd)
    const std::uint64_t frac = static_cast<std::uint64_t>((std::int64_t{1} << f) + xd);
    return static_cast<std::uint64_t>(detail::antilog_floor(kd - 1, frac, f, quotient_frac_bits));
}

} // namespace simdive
