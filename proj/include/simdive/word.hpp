#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace simdive {

/// Supported operand widths.
enum class Width : unsigned { w8 = 8, w16 = 16, w32 = 32 };

/// Arithmetic function of a unit or SIMD lane.
enum class Op : std::uint8_t { mul, div };

constexpr unsigned bits(Width w) noexcept { return static_cast<unsigned>(w); }

/// Fraction register width for an operand width: every bit below the leading
/// one fits without loss.
constexpr unsigned fraction_bits(Width w) noexcept { return bits(w) - 1; }

constexpr std::uint64_t max_value(Width w) noexcept {
    return (std::uint64_t{1} << bits(w)) - 1;
}

inline Width width_from_bits(unsigned n) {
    switch (n) {
        case 8: return Width::w8;
        case 16: return Width::w16;
        case 32: return Width::w32;
        default: throw std::invalid_argument("unsupported width " + std::to_string(n) + " (expected 8, 16 or 32)");
    }
}

inline const char* to_string(Op op) noexcept { return op == Op::mul ? "mul" : "div"; }

/// Unsigned operand tagged with its bit width.
class UIntWord {
public:
    constexpr UIntWord() noexcept = default;

    constexpr UIntWord(std::uint64_t value, Width width) : value_(static_cast<std::uint32_t>(value)), width_(width) {
        if (value > max_value(width)) {
            throw std::out_of_range("value does not fit in " + std::to_string(bits(width)) + " bits");
        }
    }

    constexpr std::uint32_t value() const noexcept { return value_; }
    constexpr Width width() const noexcept { return width_; }

    /// Same value at a wider width.
    constexpr UIntWord zero_extend(Width to) const {
        if (bits(to) < bits(width_)) {
            throw std::invalid_argument("zero_extend cannot narrow a word");
        }
        return UIntWord{value_, to};
    }

    friend constexpr bool operator==(const UIntWord&, const UIntWord&) noexcept = default;

private:
    std::uint32_t value_ = 0;
    Width width_ = Width::w8;
};

constexpr UIntWord u8(std::uint64_t v) { return UIntWord{v, Width::w8}; }
constexpr UIntWord u16(std::uint64_t v) { return UIntWord{v, Width::w16}; }
constexpr UIntWord u32(std::uint64_t v) { return UIntWord{v, Width::w32}; }

} // namespace simdive
