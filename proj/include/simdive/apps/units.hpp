#pragma once

// Arithmetic units the applications are parameterized on.

#include <simdive/correction.hpp>
#include <simdive/metrics.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace simdive {

inline const char* to_string(Unit u) noexcept {
    return u == Unit::exact ? "exact" : u == Unit::mitchell ? "mitchell" : "corrected";
}

inline Unit parse_unit(const std::string& s) {
    for (Unit u : {Unit::exact, Unit::mitchell, Unit::corrected}) {
        if (s == to_string(u)) {
            return u;
        }
    }
    throw std::invalid_argument("unknown arithmetic unit '" + s + "' (expected exact, mitchell or corrected)");
}

/// 8x8 unsigned multiplier, tabulated over all 65536 operand pairs.
class Multiplier8 {
public:
    explicit Multiplier8(Unit unit, unsigned region_bits = 3, unsigned coeff_bits = 6) : unit_(unit), lut_(65536) {
        std::optional<CorrectionTable> table;
        if (unit == Unit::corrected) {
            table = build_table(Op::mul, region_bits, coeff_bits);
        }
        for (unsigned a = 0; a < 256; ++a) {
            for (unsigned b = 0; b < 256; ++b) {
                const UIntWord wa = u8(a);
                const UIntWord wb = u8(b);
                std::uint64_t p = 0;
                switch (unit) {
                    case Unit::exact: p = exact_mul(wa, wb); break;
                    case Unit::mitchell: p = mitchell_mul(wa, wb); break;
                    case Unit::corrected: p = corrected_mul(wa, wb, *table); break;
                }
                lut_[a << 8 | b] = static_cast<std::uint16_t>(p);
            }
        }
    }

    std::uint32_t operator()(std::uint8_t a, std::uint8_t b) const noexcept { return lut_[unsigned{a} << 8 | b]; }
    Unit unit() const noexcept { return unit_; }

private:
    Unit unit_;
    std::vector<std::uint16_t> lut_;
};

/// 16-bit dividend by 8-bit divisor with a fixed number of quotient fraction bits.
class Divider16x8 {
public:
    Divider16x8(Unit unit, unsigned quotient_frac_bits, unsigned region_bits = 3, unsigned coeff_bits = 6)
        : unit_(unit), qbits_(quotient_frac_bits) {
        if (unit == Unit::corrected) {
            table_ = build_table(Op::div, region_bits, coeff_bits);
        }
    }

    /// Empty on division by zero.
    std::optional<std::uint64_t> operator()(std::uint16_t dividend, std::uint8_t divisor) const {
        const UIntWord a = u16(dividend);
        const UIntWord b = u8(divisor);
        switch (unit_) {
            case Unit::exact: return exact_div(a, b, qbits_);
            case Unit::mitchell: return mitchell_div(a, b, qbits_);
            case Unit::corrected: return corrected_div(a, b, *table_, qbits_);
        }
        return std::nullopt;
    }

    Unit unit() const noexcept { return unit_; }
    unsigned quotient_frac_bits() const noexcept { return qbits_; }

private:
    Unit unit_;
    unsigned qbits_;
    std::optional<CorrectionTable> table_;
};

} // namespace simdive
