#pragma once

// Error characterization: exhaustive or seeded-random sweeps producing average
// and peak relative error (ARE / PRE), normalized error distance (NED) and
// signed bias, plus relative-error heatmaps over the (x1, x2) fraction plane.
//
// Per-sample relative errors are accumulated as integers in a 2^-48 fixed-point
// grid with 128-bit sums, so merging partial sweeps is exactly associative and
// the statistics are bit-identical for every partitioning and thread count.

#include <simdive/correction.hpp>
#include <simdive/random.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace simdive {

enum class Unit : std::uint8_t { exact, mitchell, corrected };

/// Which arithmetic unit a sweep or heatmap evaluates, e.g. "corrected-div".
struct Arithmetic {
    Unit unit = Unit::mitchell;
    Op op = Op::mul;

    std::string name() const {
        const char* u = unit == Unit::exact ? "exact" : unit == Unit::mitchell ? "mitchell" : "corrected";
        return std::string(u) + "-" + to_string(op);
    }

    static Arithmetic parse(const std::string& s) {
        for (Unit u : {Unit::exact, Unit::mitchell, Unit::corrected}) {
            for (Op o : {Op::mul, Op::div}) {
                if (Arithmetic{u, o}.name() == s) {
                    return {u, o};
                }
            }
        }
        throw std::invalid_argument("unknown arithmetic '" + s + "'");
    }

    static std::vector<std::string> names() {
        std::vector<std::string> out;
        for (Unit u : {Unit::exact, Unit::mitchell, Unit::corrected}) {
            for (Op o : {Op::mul, Op::div}) {
                out.push_back(Arithmetic{u, o}.name());
            }
        }
        return out;
    }
};

struct Sampling {
    enum class Kind : std::uint8_t { exhaustive, uniform_random };
    Kind kind = Kind::exhaustive;
    std::uint64_t count = 0;
    std::uint64_t seed = 0;

    static Sampling exhaustive() { return {}; }
    static Sampling uniform(std::uint64_t count, std::uint64_t seed) { return {Kind::uniform_random, count, seed}; }

    std::string name() const { return kind == Kind::exhaustive ? "exhaustive" : "uniform"; }
};

struct SweepSpec {
    static constexpr std::uint64_t max_exhaustive_pairs = std::uint64_t{1} << 24;

    Arithmetic arith;
    Width width = Width::w8;
    Sampling sampling;
    std::optional<Width> divisor_width;          ///< narrower divisor, e.g. 16/8
    std::optional<unsigned> quotient_frac_bits;  ///< division only; default width-1
    unsigned region_bits = 3;
    unsigned coeff_bits = 6;
    unsigned threads = 1;

    Width second_width() const { return arith.op == Op::div && divisor_width ? *divisor_width : width; }
    unsigned quotient_bits() const { return arith.op == Op::div ? quotient_frac_bits.value_or(fraction_bits(width)) : 0; }

    /// Second-operand range: divisors start at 1.
    std::uint64_t second_lo() const { return arith.op == Op::div ? 1 : 0; }
    std::uint64_t second_span() const { return max_value(second_width()) + 1 - second_lo(); }

    std::uint64_t space_size() const { return (max_value(width) + 1) * second_span(); }
    std::uint64_t sample_count() const { return sampling.kind == Sampling::Kind::exhaustive ? space_size() : sampling.count; }

    void validate() const {
        if (arith.op == Op::div && divisor_width && bits(*divisor_width) > bits(width)) {
            throw std::invalid_argument("divisor width exceeds dividend width");
        }
        if (arith.op == Op::mul && divisor_width) {
            throw std::invalid_argument("divisor width applies to division only");
        }
        if (sampling.kind == Sampling::Kind::exhaustive && space_size() > max_exhaustive_pairs) {
            throw std::invalid_argument("exhaustive sweep over " + std::to_string(space_size()) +
                                        " pairs exceeds the 2^24 limit; use random sampling");
        }
        if (sampling.kind == Sampling::Kind::uniform_random && sampling.count == 0) {
            throw std::invalid_argument("random sweep needs a positive sample count");
        }
        if (quotient_bits() > 32) {
            throw std::invalid_argument("quotient_frac_bits must be <= 32");
        }
        if (arith.unit == Unit::corrected) {
            CorrectionTable::check_parameters(region_bits, coeff_bits);
        }
    }
};

/// Aggregate sweep results. Percentages for are/pre/mean_signed.
struct ErrorStats {
    double are = 0.0;
    double pre = 0.0;
    double ned = 0.0;
    double mean_signed = 0.0;      ///< mean of (exact - approx) / exact
    std::uint64_t count = 0;       ///< pairs entering the relative-error terms
    std::uint64_t zero_exact = 0;  ///< pairs skipped because the exact result is 0
    std::uint64_t clamp_events = 0;
    // Division: pairs with dividend >= divisor only.
    double are_filtered = 0.0;
    double pre_filtered = 0.0;
    std::uint64_t count_filtered = 0;

    friend bool operator==(const ErrorStats&, const ErrorStats&) = default;
};

/// One evaluated pair.
struct Sample {
    std::uint64_t exact = 0;
    std::uint64_t approx = 0;
    bool clamped = false;
};

/// Evaluates a unit on a pair of raw operands.
class Evaluator {
public:
    Evaluator(Arithmetic arith, Width width, Width second_width, unsigned quotient_frac_bits,
              std::optional<CorrectionTable> table = std::nullopt)
        : arith_(arith), width_(width), second_(second_width), qbits_(quotient_frac_bits), table_(std::move(table)) {
        if (arith.unit == Unit::corrected && (!table_ || table_->mode() != arith.op)) {
            throw std::invalid_argument("corrected unit needs a table of the matching mode");
        }
    }

    static Evaluator for_spec(const SweepSpec& spec) {
        std::optional<CorrectionTable> table;
        if (spec.arith.unit == Unit::corrected) {
            table = build_table(spec.arith.op, spec.region_bits, spec.coeff_bits);
        }
        return Evaluator{spec.arith, spec.width, spec.second_width(), spec.quotient_bits(), std::move(table)};
    }

    Sample operator()(std::uint64_t a, std::uint64_t b) const {
        const UIntWord wa{a, width_};
        const UIntWord wb{b, second_};
        if (arith_.op == Op::mul) {
            const std::uint64_t exact = exact_mul(wa, wb);
            switch (arith_.unit) {
                case Unit::exact: return {exact, exact, false};
                case Unit::mitchell: return {exact, mitchell_mul(wa, wb), false};
                case Unit::corrected: {
                    const auto r = corrected_mul_detail(wa, wb, *table_);
                    return {exact, r.value, r.clamped};
                }
            }
        }
        const std::uint64_t exact = *exact_div(wa, wb, qbits_);
        switch (arith_.unit) {
            case Unit::exact: return {exact, exact, false};
            case Unit::mitchell: return {exact, *mitchell_div(wa, wb, qbits_), false};
            case Unit::corrected: {
                const auto r = *corrected_div_detail(wa, wb, *table_, qbits_);
                return {exact, r.value, r.clamped};
            }
        }
        return {};
    }

    const std::optional<CorrectionTable>& table() const noexcept { return table_; }

private:
    Arithmetic arith_;
    Width width_;
    Width second_;
    unsigned qbits_;
    std::optional<CorrectionTable> table_;
};

/// Partial sweep statistics; merge() is associative and commutative.
class ErrorAccumulator {
public:
    static constexpr int fixed_bits = 48;

    void add(const Sample& s, bool in_filter = true) {
        clamp_events_ += s.clamped ? 1 : 0;
        const std::uint64_t dist = s.exact > s.approx ? s.exact - s.approx : s.approx - s.exact;
        dist_sum_ += dist;
        dist_max_ = std::max(dist_max_, dist);
        ++dist_count_;
        if (s.exact == 0) {
            ++zero_exact_;
            return;
        }
        const double signed_rel = (static_cast<double>(s.exact) - static_cast<double>(s.approx)) / static_cast<double>(s.exact);
        const double rel = std::fabs(signed_rel);
        const std::int64_t q = to_fixed(signed_rel);
        const std::int64_t qa = q < 0 ? -q : q;
        all_.add(qa, rel);
        signed_sum_ += q;
        if (in_filter) {
            filtered_.add(qa, rel);
        }
    }

    void merge(const ErrorAccumulator& o) {
        all_.merge(o.all_);
        filtered_.merge(o.filtered_);
        signed_sum_ += o.signed_sum_;
        dist_sum_ += o.dist_sum_;
        dist_max_ = std::max(dist_max_, o.dist_max_);
        dist_count_ += o.dist_count_;
        zero_exact_ += o.zero_exact_;
        clamp_events_ += o.clamp_events_;
    }

    ErrorStats finish() const {
        ErrorStats s;
        s.count = all_.count;
        s.zero_exact = zero_exact_;
        s.clamp_events = clamp_events_;
        s.are = 100.0 * all_.mean();
        s.pre = 100.0 * all_.max;
        s.mean_signed = all_.count ? 100.0 * from_fixed(signed_sum_) / static_cast<double>(all_.count) : 0.0;
        s.ned = dist_max_ == 0 ? 0.0
                               : (static_cast<double>(dist_sum_) / static_cast<double>(dist_count_)) / static_cast<double>(dist_max_);
        s.are_filtered = 100.0 * filtered_.mean();
        s.pre_filtered = 100.0 * filtered_.max;
        s.count_filtered = filtered_.count;
        return s;
    }

private:
    __extension__ typedef __int128 int128_t;

    struct Part {
        int128_t sum = 0;
        double max = 0.0;
        std::uint64_t count = 0;

        void add(std::int64_t q, double rel) {
            sum += q;
            max = std::max(max, rel);
            ++count;
        }
        void merge(const Part& o) {
            sum += o.sum;
            max = std::max(max, o.max);
            count += o.count;
        }
        double mean() const { return count ? from_fixed(sum) / static_cast<double>(count) : 0.0; }
    };

    static std::int64_t to_fixed(double r) {
        const double capped = std::clamp(r, -32768.0, 32768.0);
        return std::llround(std::ldexp(capped, fixed_bits));
    }
    static double from_fixed(int128_t v) { return std::ldexp(static_cast<double>(v), -fixed_bits); }

    Part all_;
    Part filtered_;
    int128_t signed_sum_ = 0;
    uint128_t dist_sum_ = 0;
    std::uint64_t dist_max_ = 0;
    std::uint64_t dist_count_ = 0;
    std::uint64_t zero_exact_ = 0;
    std::uint64_t clamp_events_ = 0;
};

/// Operand pair number `index` of a sweep.
inline std::pair<std::uint64_t, std::uint64_t> sweep_operands(const SweepSpec& spec, std::uint64_t index) {
    const std::uint64_t lo = spec.second_lo();
    const std::uint64_t span = spec.second_span();
    if (spec.sampling.kind == Sampling::Kind::exhaustive) {
        return {index / span, lo + index % span};
    }
    const std::uint64_t ra = SplitMix64::at(spec.sampling.seed, 2 * index);
    const std::uint64_t rb = SplitMix64::at(spec.sampling.seed, 2 * index + 1);
    return {ra >> (64 - bits(spec.width)), scale_to_range(rb, lo, span)};
}

/// Statistics over sweep indices [begin, end).
inline ErrorAccumulator sweep_range(const SweepSpec& spec, const Evaluator& eval, std::uint64_t begin, std::uint64_t end) {
    ErrorAccumulator acc;
    for (std::uint64_t i = begin; i < end; ++i) {
        const auto [a, b] = sweep_operands(spec, i);
        acc.add(eval(a, b), spec.arith.op == Op::mul || a >= b);
    }
    return acc;
}

inline ErrorStats characterize(const SweepSpec& spec) {
    spec.validate();
    const Evaluator eval = Evaluator::for_spec(spec);
    const std::uint64_t n = spec.sample_count();
    const unsigned threads = std::max(1u, spec.threads);
    if (threads == 1) {
        return sweep_range(spec, eval, 0, n).finish();
    }
    std::vector<ErrorAccumulator> parts(threads);
    {
        std::vector<std::jthread> pool;
        const std::uint64_t chunk = (n + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::uint64_t begin = std::min(n, t * chunk);
            const std::uint64_t end = std::min(n, begin + chunk);
            pool.emplace_back([&, t, begin, end] { parts[t] = sweep_range(spec, eval, begin, end); });
        }
    }
    ErrorAccumulator total;
    for (const auto& p : parts) {
        total.merge(p);
    }
    return total.finish();
}

/// Normalized error distance: mean |e| over max |e|, 0 when every error is 0.
inline double ned(std::span<const double> errors) {
    if (errors.empty()) {
        throw std::invalid_argument("ned needs at least one error");
    }
    double sum = 0.0;
    double mx = 0.0;
    for (double e : errors) {
        sum += std::fabs(e);
        mx = std::max(mx, std::fabs(e));
    }
    return mx == 0.0 ? 0.0 : (sum / static_cast<double>(errors.size())) / mx;
}

// ---------------------------------------------------------------------------
// Heatmaps
// ---------------------------------------------------------------------------

struct Matrix {
    unsigned rows = 0;
    unsigned cols = 0;
    std::vector<double> data;

    double& at(unsigned r, unsigned c) { return data.at(std::size_t{r} * cols + c); }
    double at(unsigned r, unsigned c) const { return data.at(std::size_t{r} * cols + c); }
    double max() const { return data.empty() ? 0.0 : *std::max_element(data.begin(), data.end()); }
    double max_abs() const {
        double m = 0.0;
        for (double v : data) {
            m = std::max(m, std::fabs(v));
        }
        return m;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

enum class HeatmapPath : std::uint8_t {
    analytic, ///< real-valued formulas at the cell centre, no integer rounding
    integer,  ///< bit-accurate unit on the operands nearest the cell centre
};

struct HeatmapSpec {
    Arithmetic arith;
    unsigned grid = 64;
    int k1 = 5;
    int k2 = 5;
    HeatmapPath path = HeatmapPath::analytic;
    Width width = Width::w16; ///< integer path operand width
    unsigned region_bits = 3;
    unsigned coeff_bits = 6;
};

namespace detail {

/// Mitchell antilog of (integer, fraction) with the fraction's carry/borrow
/// folded into the exponent. Exact in binary floating point.
inline double real_antilog(int exponent, double frac) {
    const double carry = std::floor(frac);
    return std::ldexp(1.0 + (frac - carry), exponent + static_cast<int>(carry));
}

inline double analytic_relative_error(Arithmetic arith, const CorrectionTable* table, int k1, int k2, double x1, double x2) {
    const bool mul = arith.op == Op::mul;
    const int k = mul ? k1 + k2 : k1 - k2;
    const double exact = std::ldexp(mul ? (1.0 + x1) * (1.0 + x2) : (1.0 + x1) / (1.0 + x2), k);
    const double frac = mul ? x1 + x2 : x1 - x2;
    double approx = exact;
    if (arith.unit == Unit::mitchell) {
        approx = real_antilog(k, frac);
    } else if (arith.unit == Unit::corrected) {
        approx = real_antilog(k, frac + table->value(table->region_of(x1), table->region_of(x2)));
    }
    return (exact - approx) / exact;
}

} // namespace detail

/// Relative error (exact - approx) / exact over a grid x grid lattice of cell
/// centres; row = x1 cell, column = x2 cell.
inline Matrix heatmap(const HeatmapSpec& spec) {
    if (spec.grid < 16) {
        throw std::invalid_argument("heatmap grid must be at least 16");
    }
    std::optional<CorrectionTable> table;
    if (spec.arith.unit == Unit::corrected) {
        table = build_table(spec.arith.op, spec.region_bits, spec.coeff_bits);
    }
    const int w = static_cast<int>(bits(spec.width));
    if (spec.path == HeatmapPath::integer && (spec.k1 < 0 || spec.k2 < 0 || spec.k1 >= w || spec.k2 >= w)) {
        throw std::invalid_argument("k1 and k2 must lie inside the operand width on the integer path");
    }
    std::optional<Evaluator> eval;
    if (spec.path == HeatmapPath::integer) {
        eval.emplace(spec.arith, spec.width, spec.width, spec.arith.op == Op::div ? fraction_bits(spec.width) : 0, table);
    }
    Matrix m{spec.grid, spec.grid, std::vector<double>(std::size_t{spec.grid} * spec.grid)};
    for (unsigned r = 0; r < spec.grid; ++r) {
        const double x1 = (r + 0.5) / spec.grid;
        for (unsigned c = 0; c < spec.grid; ++c) {
            const double x2 = (c + 0.5) / spec.grid;
            if (spec.path == HeatmapPath::analytic) {
                m.at(r, c) = detail::analytic_relative_error(spec.arith, table ? &*table : nullptr, spec.k1, spec.k2, x1, x2);
                continue;
            }
            const auto a = static_cast<std::uint64_t>(std::floor(std::ldexp(1.0 + x1, spec.k1)));
            const auto b = static_cast<std::uint64_t>(std::floor(std::ldexp(1.0 + x2, spec.k2)));
            const Sample s = (*eval)(a, b);
            m.at(r, c) = s.exact == 0 ? 0.0
                                      : (static_cast<double>(s.exact) - static_cast<double>(s.approx)) / static_cast<double>(s.exact);
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

inline const char* stats_csv_header() {
    return "op,width,sampling,seed,are,pre,ned,mean_signed,count,clamp_events,"
           "divisor_width,quotient_frac_bits,region_bits,coeff_bits,zero_exact,are_filtered,pre_filtered,count_filtered";
}

inline void write_stats_csv_row(std::ostream& os, const SweepSpec& spec, const ErrorStats& s) {
    const auto old_precision = os.precision(10);
    os << spec.arith.name() << ',' << bits(spec.width) << ',' << spec.sampling.name() << ','
       << (spec.sampling.kind == Sampling::Kind::exhaustive ? 0 : spec.sampling.seed) << ',' << s.are << ',' << s.pre << ','
       << s.ned << ',' << s.mean_signed << ',' << s.count << ',' << s.clamp_events << ',' << bits(spec.second_width()) << ','
       << spec.quotient_bits() << ',';
    if (spec.arith.unit == Unit::corrected) {
        os << spec.region_bits << ',' << spec.coeff_bits;
    } else {
        os << ',';
    }
    os << ',' << s.zero_exact << ',' << s.are_filtered << ',' << s.pre_filtered << ',' << s.count_filtered << '\n';
    os.precision(old_precision);
}

/// Header row of x2 cell centres, then one row per x1 cell.
inline void write_matrix_csv(std::ostream& os, const Matrix& m) {
    const auto old_precision = os.precision(17);
    os << "x1\\x2";
    for (unsigned c = 0; c < m.cols; ++c) {
        os << ',' << (c + 0.5) / m.cols;
    }
    os << '\n';
    for (unsigned r = 0; r < m.rows; ++r) {
        os << (r + 0.5) / m.rows;
        for (unsigned c = 0; c < m.cols; ++c) {
            os << ',' << m.at(r, c);
        }
        os << '\n';
    }
    os.precision(old_precision);
}

} // namespace simdive
