#pragma once

// Packed sub-word execution on a 32-bit container. The container splits into
// one 32-bit lane, two 16-bit lanes, one 16-bit plus two 8-bit lanes, or four
// 8-bit lanes; lane 0 sits in the least-significant bits. Every lane runs the
// corrected multiplier or divider independently.
//
// Results use a 64-bit container with the same lane structure at twice the
// width: a w-bit lane's result occupies 2w bits at twice the lane's offset.
// Products fill their slot; integer quotients are zero-extended into it.

#include <simdive/correction.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace simdive {

enum class Layout : std::uint8_t { one32 = 0, two16 = 1, one16_two8 = 2, four8 = 3 };

inline constexpr std::array<Layout, 4> all_layouts{Layout::one32, Layout::two16, Layout::one16_two8, Layout::four8};

constexpr unsigned lane_count(Layout l) noexcept {
    switch (l) {
        case Layout::one32: return 1;
        case Layout::two16: return 2;
        case Layout::one16_two8: return 3;
        case Layout::four8: return 4;
    }
    return 0;
}

namespace detail {
inline constexpr std::array<Width, 1> lanes_w32{Width::w32};
inline constexpr std::array<Width, 2> lanes_w16{Width::w16, Width::w16};
inline constexpr std::array<Width, 3> lanes_w16_8{Width::w16, Width::w8, Width::w8};
inline constexpr std::array<Width, 4> lanes_w8{Width::w8, Width::w8, Width::w8, Width::w8};
} // namespace detail

/// Lane widths from lane 0 (least significant) upward.
constexpr std::span<const Width> lane_widths(Layout l) noexcept {
    switch (l) {
        case Layout::one32: return detail::lanes_w32;
        case Layout::two16: return detail::lanes_w16;
        case Layout::one16_two8: return detail::lanes_w16_8;
        case Layout::four8: return detail::lanes_w8;
    }
    return {};
}

/// Bit offset of a lane inside the 32-bit operand container.
constexpr unsigned lane_offset(Layout l, unsigned lane) noexcept {
    unsigned off = 0;
    const auto w = lane_widths(l);
    for (unsigned i = 0; i < lane && i < w.size(); ++i) {
        off += bits(w[i]);
    }
    return off;
}

inline const char* to_string(Layout l) noexcept {
    switch (l) {
        case Layout::one32: return "1x32";
        case Layout::two16: return "2x16";
        case Layout::one16_two8: return "16+8+8";
        case Layout::four8: return "4x8";
    }
    return "?";
}

class LaneConfig {
public:
    LaneConfig(Layout layout, std::span<const Op> modes) : layout_(layout) {
        if (modes.size() != lane_count(layout)) {
            throw std::invalid_argument(std::string("layout ") + to_string(layout) + " needs " +
                                        std::to_string(lane_count(layout)) + " lane modes");
        }
        std::copy(modes.begin(), modes.end(), modes_.begin());
    }
    LaneConfig(Layout layout, std::initializer_list<Op> modes) : LaneConfig(layout, std::span<const Op>(modes.begin(), modes.size())) {}

    /// Every lane in the same mode.
    static LaneConfig uniform(Layout layout, Op op) {
        std::array<Op, 4> m{};
        m.fill(op);
        return LaneConfig{layout, std::span<const Op>(m.data(), lane_count(layout))};
    }

    Layout layout() const noexcept { return layout_; }
    unsigned lanes() const noexcept { return lane_count(layout_); }
    Op mode(unsigned lane) const { return modes_.at(lane); }
    std::span<const Op> modes() const noexcept { return {modes_.data(), lanes()}; }

    friend bool operator==(const LaneConfig& a, const LaneConfig& b) noexcept {
        return a.layout_ == b.layout_ && std::equal(a.modes().begin(), a.modes().end(), b.modes().begin(), b.modes().end());
    }

private:
    Layout layout_;
    std::array<Op, 4> modes_{};
};

/// Control word: bits 0-3 one-hot layout (bit = Layout value), bits 4-7 one
/// mode bit per lane (1 = divide), lane 0 at bit 4.
inline std::uint8_t encode_config(const LaneConfig& cfg) noexcept {
    std::uint8_t word = static_cast<std::uint8_t>(1u << static_cast<unsigned>(cfg.layout()));
    for (unsigned i = 0; i < cfg.lanes(); ++i) {
        if (cfg.mode(i) == Op::div) {
            word |= static_cast<std::uint8_t>(1u << (4 + i));
        }
    }
    return word;
}

/// Rejects an empty or multi-hot layout field and mode bits on absent lanes.
inline LaneConfig decode_config(std::uint8_t word) {
    const unsigned layout_bits = word & 0xF;
    if (layout_bits == 0 || (layout_bits & (layout_bits - 1)) != 0) {
        throw std::invalid_argument("layout field must be one-hot");
    }
    const auto layout = static_cast<Layout>(*msb_scan(layout_bits));
    const unsigned mode_bits = word >> 4;
    if (mode_bits >> lane_count(layout)) {
        throw std::invalid_argument("mode bit set for a lane the layout does not have");
    }
    std::array<Op, 4> modes{};
    for (unsigned i = 0; i < lane_count(layout); ++i) {
        modes[i] = (mode_bits >> i) & 1u ? Op::div : Op::mul;
    }
    return LaneConfig{layout, std::span<const Op>(modes.data(), lane_count(layout))};
}

struct PackedWord {
    std::uint32_t bits = 0;
    LaneConfig config;
};

inline PackedWord pack(std::span<const UIntWord> lanes, const LaneConfig& cfg) {
    const auto widths = lane_widths(cfg.layout());
    if (lanes.size() != widths.size()) {
        throw std::invalid_argument("lane count does not match the layout");
    }
    std::uint32_t word = 0;
    unsigned off = 0;
    for (std::size_t i = 0; i < lanes.size(); ++i) {
        if (lanes[i].width() != widths[i]) {
            throw std::invalid_argument("lane " + std::to_string(i) + " width does not match the layout");
        }
        word |= lanes[i].value() << off;
        off += bits(widths[i]);
    }
    return {word, cfg};
}

inline std::vector<UIntWord> unpack(const PackedWord& p) {
    std::vector<UIntWord> out;
    unsigned off = 0;
    for (const Width w : lane_widths(p.config.layout())) {
        out.emplace_back((std::uint64_t{p.bits} >> off) & max_value(w), w);
        off += bits(w);
    }
    return out;
}

/// Multiplier and divider tables used by the packed unit.
struct CorrectionTables {
    CorrectionTable mul;
    CorrectionTable div;

    static CorrectionTables build(unsigned region_bits = 3, unsigned coeff_bits = 6) {
        return {build_table(Op::mul, region_bits, coeff_bits), build_table(Op::div, region_bits, coeff_bits)};
    }
};

struct LaneResult {
    std::uint64_t value = 0;
    bool computed = false;       ///< false for power-gated lanes
    bool divide_by_zero = false;
    bool clamped = false;

    friend constexpr bool operator==(const LaneResult&, const LaneResult&) noexcept = default;
};

struct ExecResult {
    std::uint64_t bits = 0; ///< 64-bit result container
    std::vector<LaneResult> lanes;
    unsigned skipped_lanes = 0;
};

/// Scalar op a lane performs; the reference every packed lane must match.
inline LaneResult lane_op(Op op, UIntWord a, UIntWord b, const CorrectionTables& tables) {
    LaneResult r;
    r.computed = true;
    if (op == Op::mul) {
        const auto p = corrected_mul_detail(a, b, tables.mul);
        r.value = p.value;
        r.clamped = p.clamped;
        return r;
    }
    const auto q = corrected_div_detail(a, b, tables.div);
    if (!q) {
        r.divide_by_zero = true;
        return r;
    }
    r.value = q->value;
    r.clamped = q->clamped;
    return r;
}

/// Runs every lane of a packed pair. Lanes outside active_mask (bit i = lane
/// i) are power-gated: never computed, result 0, counted in skipped_lanes. A
/// zero divisor flags only its own lane.
inline ExecResult simdive_exec(std::uint32_t a, std::uint32_t b, const LaneConfig& cfg, const CorrectionTables& tables,
                               unsigned active_mask = 0xF) {
    ExecResult out;
    out.lanes.resize(cfg.lanes());
    unsigned off = 0;
    const auto widths = lane_widths(cfg.layout());
    for (unsigned i = 0; i < widths.size(); ++i) {
        const Width w = widths[i];
        if ((active_mask >> i) & 1u) {
            const UIntWord la{(std::uint64_t{a} >> off) & max_value(w), w};
            const UIntWord lb{(std::uint64_t{b} >> off) & max_value(w), w};
            out.lanes[i] = lane_op(cfg.mode(i), la, lb, tables);
            out.bits |= out.lanes[i].value << (2 * off);
        } else {
            ++out.skipped_lanes;
        }
        off += bits(w);
    }
    return out;
}

inline ExecResult simdive_exec(const PackedWord& a, const PackedWord& b, const CorrectionTables& tables, unsigned active_mask = 0xF) {
    if (!(a.config == b.config)) {
        throw std::invalid_argument("packed operands use different configurations");
    }
    return simdive_exec(a.bits, b.bits, a.config, tables, active_mask);
}

/// Result containers for a stream of packed pairs, split across threads.
/// Output is independent of the thread count.
inline std::vector<std::uint64_t> simdive_exec_batch(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b,
                                                     const LaneConfig& cfg, const CorrectionTables& tables,
                                                     unsigned threads = 1) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("batch operand streams differ in length");
    }
    std::vector<std::uint64_t> out(a.size());
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, a.size()))));
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            out[i] = simdive_exec(a[i], b[i], cfg, tables).bits;
        }
    };
    if (threads == 1) {
        work(0, a.size());
        return out;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (a.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = std::min(a.size(), t * chunk);
        const std::size_t end = std::min(a.size(), begin + chunk);
        pool.emplace_back(work, begin, end);
    }
    pool.clear(); // joins
    return out;
}

} // namespace simdive
