#pragma once

// Region-based error reduction for the Mitchell multiplier and divider.
//
// The unit square of fraction pairs (x1, x2) is split into 2^m x 2^m regions
// by the top m bits of each fraction. Each region owns one signed n-bit
// fixed-point coefficient that is added to the fractional sum (multiplier) or
// difference (divider) in the same ternary addition, before the carry/borrow
// decides the antilog case.
//
// Coefficients live in the fraction (log) domain: for every (x1, x2) the ideal
// correction is the amount that moves Mitchell's approximate log onto the
// Mitchell log of the exact result. A region's coefficient is the mean of that
// ideal correction over the region. Both error expressions factor out
// 2^(k1 +/- k2), so one table serves every operand width.

#include <simdive/core.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace simdive {

enum class ErrorBranch : std::uint8_t {
    sum_below_one,      ///< multiplier, x1 + x2 < 1
    sum_at_least_one,   ///< multiplier, x1 + x2 >= 1
    x1_below_x2,        ///< divider, x1 < x2
    x1_at_least_x2,     ///< divider, x1 >= x2
};

/// Mitchell error with the 2^(k1 +/- k2) scale factored out.
struct NormalizedError {
    ErrorBranch branch;
    double value;
};

inline void require_unit_fraction(double x) {
    if (!(x >= 0.0 && x < 1.0)) {
        throw std::domain_error("fraction must lie in [0, 1)");
    }
}

/// Exact product minus Mitchell product, over 2^(k1+k2). Always >= 0.
inline NormalizedError normalized_error_mul(double x1, double x2) {
    require_unit_fraction(x1);
    require_unit_fraction(x2);
    if (x1 + x2 < 1.0) {
        return {ErrorBranch::sum_below_one, x1 * x2};
    }
    return {ErrorBranch::sum_at_least_one, 1.0 - x1 - x2 + x1 * x2};
}

/// Mitchell quotient minus exact quotient, over 2^(k1-k2). Always >= 0:
/// the uncorrected divider never underestimates.
inline NormalizedError normalized_error_div(double x1, double x2) {
    require_unit_fraction(x1);
    require_unit_fraction(x2);
    if (x1 < x2) {
        return {ErrorBranch::x1_below_x2, (x1 * (x2 - 1.0) + x2 - x2 * x2) / (2.0 * (1.0 + x2))};
    }
    return {ErrorBranch::x1_at_least_x2, (x1 * x2 - x2 * x2) / (1.0 + x2)};
}

/// Piecewise-linear Mitchell logarithm: floor(log2 y) + y / 2^floor(log2 y) - 1.
inline double mitchell_log2(double y) {
    if (!(y > 0.0)) {
        throw std::domain_error("mitchell_log2 needs a positive argument");
    }
    int e = 0;
    const double m = std::frexp(y, &e); // y = m 2^e, m in [0.5, 1)
    return static_cast<double>(e - 1) + (2.0 * m - 1.0);
}

/// Ideal fraction-domain correction at (x1, x2): adding it to x1 + x2 (or
/// x1 - x2) makes the Mitchell antilog reproduce the exact result.
inline double fraction_domain_error(Op op, double x1, double x2) {
    if (op == Op::mul) {
        const double s = x1 + x2;
        const double approx = s < 1.0 ? 1.0 + s : 2.0 * s;
        return mitchell_log2(approx + normalized_error_mul(x1, x2).value) - s;
    }
    const double d = x1 - x2;
    const double approx = d >= 0.0 ? 1.0 + d : (2.0 + d) / 2.0;
    return mitchell_log2(approx - normalized_error_div(x1, x2).value) - d;
}

/// 2^(2m) signed coefficients, each entry / 2^coeff_bits in fraction units.
/// Row-major by (x1 region, x2 region).
class CorrectionTable {
public:
    static constexpr unsigned max_region_bits = 4;
    static constexpr unsigned max_coeff_bits = 16;

    CorrectionTable(Op mode, unsigned region_bits, unsigned coeff_bits, std::vector<std::int32_t> entries)
        : mode_(mode), region_bits_(region_bits), coeff_bits_(coeff_bits), entries_(std::move(entries)) {
        check_parameters(region_bits, coeff_bits);
        if (entries_.size() != (std::size_t{1} << (2 * region_bits))) {
            throw std::invalid_argument("correction table needs 2^(2m) entries");
        }
        const std::int64_t limit = std::int64_t{1} << coeff_bits;
        for (const auto c : entries_) {
            if (c <= -limit || c >= limit) {
                throw std::invalid_argument("coefficient magnitude must stay below 1");
            }
            if (mode == Op::mul && c < 0) {
                throw std::invalid_argument("multiplier coefficients must be non-negative");
            }
        }
    }

    static void check_parameters(unsigned region_bits, unsigned coeff_bits) {
        if (region_bits < 1 || region_bits > max_region_bits) {
            throw std::invalid_argument("region_bits must be in [1, 4]");
        }
        if (coeff_bits < 1 || coeff_bits > max_coeff_bits) {
            throw std::invalid_argument("coeff_bits must be in [1, 16]");
        }
    }

    Op mode() const noexcept { return mode_; }
    unsigned region_bits() const noexcept { return region_bits_; }
    unsigned coeff_bits() const noexcept { return coeff_bits_; }
    unsigned regions_per_axis() const noexcept { return 1u << region_bits_; }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<std::int32_t>& entries() const noexcept { return entries_; }

    std::int32_t at(unsigned i, unsigned j) const { return entries_.at(std::size_t{i} * regions_per_axis() + j); }
    double value(unsigned i, unsigned j) const { return std::ldexp(static_cast<double>(at(i, j)), -static_cast<int>(coeff_bits_)); }

    /// Region index of a real fraction in [0, 1).
    unsigned region_of(double x) const noexcept { return static_cast<unsigned>(x * regions_per_axis()); }

    friend bool operator==(const CorrectionTable&, const CorrectionTable&) = default;

private:
    Op mode_;
    unsigned region_bits_;
    unsigned coeff_bits_;
    std::vector<std::int32_t> entries_;
};

/// Round to nearest, ties away from zero.
inline std::int32_t quantize_coefficient(double value, unsigned coeff_bits) {
    return static_cast<std::int32_t>(std::lround(std::ldexp(value, static_cast<int>(coeff_bits))));
}

/// Mean of fraction_domain_error over region (i, j) by midpoint averaging on
/// a samples x samples grid.
inline double region_mean(Op op, unsigned region_bits, unsigned i, unsigned j, unsigned samples = 256) {
    const double width = std::ldexp(1.0, -static_cast<int>(region_bits));
    double sum = 0.0;
    for (unsigned u = 0; u < samples; ++u) {
        const double x1 = (i + (u + 0.5) / samples) * width;
        double row = 0.0;
        for (unsigned v = 0; v < samples; ++v) {
            const double x2 = (j + (v + 0.5) / samples) * width;
            row += fraction_domain_error(op, x1, x2);
        }
        sum += row;
    }
    return sum / (static_cast<double>(samples) * samples);
}

inline CorrectionTable build_table(Op mode, unsigned region_bits = 3, unsigned coeff_bits = 6) {
    CorrectionTable::check_parameters(region_bits, coeff_bits);
    const unsigned r = 1u << region_bits;
    std::vector<std::int32_t> entries;
    entries.reserve(std::size_t{r} * r);
    for (unsigned i = 0; i < r; ++i) {
        for (unsigned j = 0; j < r; ++j) {
            entries.push_back(quantize_coefficient(region_mean(mode, region_bits, i, j), coeff_bits));
        }
    }
    return CorrectionTable{mode, region_bits, coeff_bits, std::move(entries)};
}

/// Result of a corrected operation; clamped marks a saturated output.
struct CorrectedResult {
    std::uint64_t value = 0;
    bool clamped = false;

    friend constexpr bool operator==(const CorrectedResult&, const CorrectedResult&) noexcept = default;
};

namespace detail {

/// Three-input fractional sum in a G-bit field, G = max(F, n). Fractions are
/// widened losslessly; the coefficient keeps all n bits.
struct TernarySum {
    std::int64_t value; ///< x1 +/- x2 + c, scaled by 2^field_bits
    unsigned field_bits;
};

inline TernarySum ternary_sum(const LogApprox& la, const LogApprox& lb, const CorrectionTable& table, bool subtract) {
    const unsigned f = la.fraction_width;
    const unsigned g = std::max(f, table.coeff_bits());
    const std::int64_t x1 = std::int64_t{la.frac_bits} << (g - f);
    const std::int64_t x2 = std::int64_t{lb.frac_bits} << (g - f);
    const unsigned drop = g - table.region_bits();
    const auto i = static_cast<unsigned>(x1 >> drop);
    const auto j = static_cast<unsigned>(x2 >> drop);
    const std::int64_t c = std::int64_t{table.at(i, j)} << (g - table.coeff_bits());
    return {subtract ? x1 - x2 + c : x1 + x2 + c, g};
}

/// Antilog of exponent + sum / 2^G with the sum's integer part (carry or
/// borrow, possibly two bits) folded into the exponent, saturated at limit.
inline CorrectedResult reconstruct(int exponent, TernarySum sum, unsigned out_frac, std::uint64_t limit) {
    const std::int64_t carry = sum.value >> sum.field_bits; // floor
    const auto frac = static_cast<std::uint64_t>(sum.value - (carry << sum.field_bits));
    const uint128_t v = antilog_floor(exponent + static_cast<int>(carry), frac, sum.field_bits, out_frac);
    if (v > limit) {
        return {limit, true};
    }
    return {static_cast<std::uint64_t>(v), false};
}

} // namespace detail

inline CorrectedResult corrected_mul_detail(UIntWord a, UIntWord b, const CorrectionTable& table) {
    detail::require_same_width(a, b);
    if (table.mode() != Op::mul) {
        throw std::invalid_argument("corrected_mul needs a multiplier table");
    }
    const LogApprox la = log_approx(a);
    const LogApprox lb = log_approx(b);
    if (la.is_zero || lb.is_zero) {
        return {};
    }
    const std::uint64_t limit = bits(a.width()) == 32 ? ~std::uint64_t{0} : (std::uint64_t{1} << (2 * bits(a.width()))) - 1;
    return detail::reconstruct(static_cast<int>(la.k + lb.k), detail::ternary_sum(la, lb, table, false), 0, limit);
}

inline std::uint64_t corrected_mul(UIntWord a, UIntWord b, const CorrectionTable& table) {
    return corrected_mul_detail(a, b, table).value;
}

/// Empty on division by zero. Saturates at 2^(width + quotient_frac_bits) - 1.
inline std::optional<CorrectedResult> corrected_div_detail(UIntWord dividend, UIntWord divisor, const CorrectionTable& table,
                                                           unsigned quotient_frac_bits = 0) {
    const UIntWord d = detail::align_divisor(dividend, divisor);
    if (table.mode() != Op::div) {
        throw std::invalid_argument("corrected_div needs a divider table");
    }
    if (quotient_frac_bits > 32) {
        throw std::invalid_argument("quotient_frac_bits must be <= 32");
    }
    if (d.value() == 0) {
        return std::nullopt;
    }
    const LogApprox la = log_approx(dividend);
    const LogApprox lb = log_approx(d);
    if (la.is_zero) {
        return CorrectedResult{};
    }
    const std::uint64_t limit = (std::uint64_t{1} << (bits(dividend.width()) + quotient_frac_bits)) - 1;
    const int exponent = static_cast<int>(la.k) - static_cast<int>(lb.k);
    return detail::reconstruct(exponent, detail::ternary_sum(la, lb, table, true), quotient_frac_bits, limit);
}

inline std::optional<std::uint64_t> corrected_div(UIntWord dividend, UIntWord divisor, const CorrectionTable& table,
                                                  unsigned quotient_frac_bits = 0) {
    const auto r = corrected_div_detail(dividend, divisor, table, quotient_frac_bits);
    if (!r) {
        return std::nullopt;
    }
    return r->value;
}

// ---------------------------------------------------------------------------
// CSV exchange: header "mode,region_bits,coeff_bits,i,j,coefficient", one row
// per region in row-major order; coefficient is the signed integer numerator
// over 2^coeff_bits.
// ---------------------------------------------------------------------------

inline void write_table_csv(std::ostream& os, const CorrectionTable& table) {
    os << "mode,region_bits,coeff_bits,i,j,coefficient\n";
    const unsigned r = table.regions_per_axis();
    for (unsigned i = 0; i < r; ++i) {
        for (unsigned j = 0; j < r; ++j) {
            os << to_string(table.mode()) << ',' << table.region_bits() << ',' << table.coeff_bits() << ',' << i << ',' << j << ','
               << table.at(i, j) << '\n';
        }
    }
}

class TableFormatError : public std::runtime_error {
public:
    TableFormatError(std::size_t line, const std::string& what)
        : std::runtime_error("table csv line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

inline CorrectionTable read_table_csv(std::istream& is) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(is, line) || line.rfind("mode,region_bits,coeff_bits,i,j,coefficient", 0) != 0) {
        throw TableFormatError(lineno, "missing header");
    }
    std::optional<Op> mode;
    unsigned m = 0;
    unsigned n = 0;
    std::vector<std::int32_t> entries;
    std::vector<bool> seen;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string mode_s, field;
        std::vector<long long> nums;
        std::getline(row, mode_s, ',');
        while (std::getline(row, field, ',')) {
            try {
                std::size_t used = 0;
                nums.push_back(std::stoll(field, &used));
                if (used != field.size()) {
                    throw std::invalid_argument(field);
                }
            } catch (const std::exception&) {
                throw TableFormatError(lineno, "not an integer: '" + field + "'");
            }
        }
        if (nums.size() != 5) {
            throw TableFormatError(lineno, "expected 6 fields");
        }
        Op row_mode;
        if (mode_s == "mul") {
            row_mode = Op::mul;
        } else if (mode_s == "div") {
            row_mode = Op::div;
        } else {
            throw TableFormatError(lineno, "unknown mode '" + mode_s + "'");
        }
        if (!mode) {
            mode = row_mode;
            if (nums[0] < 1 || nums[0] > 4 || nums[1] < 1 || nums[1] > 16) {
                throw TableFormatError(lineno, "region_bits/coeff_bits out of range");
            }
            m = static_cast<unsigned>(nums[0]);
            n = static_cast<unsigned>(nums[1]);
            entries.assign(std::size_t{1} << (2 * m), 0);
            seen.assign(entries.size(), false);
        } else if (row_mode != *mode || nums[0] != m || nums[1] != n) {
            throw TableFormatError(lineno, "inconsistent table parameters");
        }
        const long long r = 1ll << m;
        if (nums[2] < 0 || nums[2] >= r || nums[3] < 0 || nums[3] >= r) {
            throw TableFormatError(lineno, "region index out of range");
        }
        const auto idx = static_cast<std::size_t>(nums[2] * r + nums[3]);
        if (seen[idx]) {
            throw TableFormatError(lineno, "duplicate region");
        }
        seen[idx] = true;
        entries[idx] = static_cast<std::int32_t>(nums[4]);
    }
    if (!mode) {
        throw TableFormatError(lineno, "no rows");
    }
    for (bool s : seen) {
        if (!s) {
            throw TableFormatError(lineno, "missing regions");
        }
    }
    try {
        return CorrectionTable{*mode, m, n, std::move(entries)};
    } catch (const std::invalid_argument& e) {
        throw TableFormatError(lineno, e.what());
    }
}

} // namespace simdive
