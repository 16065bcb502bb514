#include <simdive/metrics.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace simdive;

namespace {

SweepSpec spec(Unit u, Op op, Width w = Width::w8, Sampling s = Sampling::exhaustive()) {
    SweepSpec out;
    out.arith = {u, op};
    out.width = w;
    out.sampling = s;
    return out;
}

} // namespace

TEST(Arithmetic, NamesRoundTrip) {
    for (const auto& n : Arithmetic::names()) {
        EXPECT_EQ(Arithmetic::parse(n).name(), n);
    }
    EXPECT_THROW(Arithmetic::parse("fast-mul"), std::invalid_argument);
}

TEST(Characterize, ExactUnitHasNoError) {
    for (Op op : {Op::mul, Op::div}) {
        const ErrorStats s = characterize(spec(Unit::exact, op));
        EXPECT_EQ(s.are, 0.0);
        EXPECT_EQ(s.pre, 0.0);
        EXPECT_EQ(s.ned, 0.0);
        EXPECT_EQ(s.mean_signed, 0.0);
    }
}

TEST(Characterize, MitchellEightBitPeakIsElevenPercent) {
    const ErrorStats s = characterize(spec(Unit::mitchell, Op::mul));
    EXPECT_NEAR(s.pre, 100.0 / 9.0, 1e-9);
    EXPECT_EQ(s.count, 255u * 255u);
    EXPECT_EQ(s.zero_exact, 511u);
    // Every Mitchell product underestimates, so the signed mean equals the absolute mean.
    EXPECT_NEAR(s.mean_signed, s.are, 1e-12);
}

TEST(Characterize, EightBitMitchellNedGolden) {
    // Pinned from the exhaustive sweep.
    EXPECT_DOUBLE_EQ(characterize(spec(Unit::mitchell, Op::mul)).ned, 0.14804642274975777);
}

TEST(Characterize, SixteenBitSampleMatchesPublishedAverage) {
    const ErrorStats s = characterize(spec(Unit::mitchell, Op::mul, Width::w16, Sampling::uniform(1000000, 1)));
    EXPECT_NEAR(s.are, 3.85, 0.3);
    EXPECT_EQ(s.count + s.zero_exact, 1000000u);
}

TEST(Characterize, RejectsOversizedExhaustiveSweep) {
    EXPECT_THROW(characterize(spec(Unit::mitchell, Op::mul, Width::w16)), std::invalid_argument);
    SweepSpec div = spec(Unit::mitchell, Op::div, Width::w16);
    div.divisor_width = Width::w8;
    EXPECT_NO_THROW(div.validate()); // 2^16 x 255 pairs
    SweepSpec bad = spec(Unit::mitchell, Op::mul);
    bad.divisor_width = Width::w8;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    EXPECT_THROW(characterize(spec(Unit::mitchell, Op::mul, Width::w8, Sampling::uniform(0, 1))), std::invalid_argument);
}

TEST(Characterize, IsDeterministicForAFixedSeed) {
    const auto s = spec(Unit::corrected, Op::mul, Width::w32, Sampling::uniform(200000, 77));
    EXPECT_EQ(characterize(s), characterize(s));
    auto other = s;
    other.sampling.seed = 78;
    EXPECT_NE(characterize(s).are, characterize(other).are);
}

TEST(Characterize, ThreadCountDoesNotChangeStatistics) {
    for (auto s : {spec(Unit::corrected, Op::div), spec(Unit::mitchell, Op::mul, Width::w16, Sampling::uniform(300001, 5))}) {
        s.threads = 1;
        const ErrorStats one = characterize(s);
        for (unsigned t : {2u, 3u, 7u}) {
            s.threads = t;
            EXPECT_EQ(characterize(s), one) << "threads=" << t;
        }
    }
}

TEST(Characterize, MergingArbitraryPartitionsIsExact) {
    SweepSpec s = spec(Unit::corrected, Op::mul);
    const Evaluator eval = Evaluator::for_spec(s);
    const std::uint64_t n = s.sample_count();
    const ErrorStats whole = sweep_range(s, eval, 0, n).finish();
    for (std::uint64_t cuts : {2u, 5u, 13u}) {
        ErrorAccumulator merged;
        // uneven pieces merged in reverse order
        std::vector<std::uint64_t> bounds{0};
        for (std::uint64_t c = 1; c < cuts; ++c) {
            bounds.push_back(n * c * c / (cuts * cuts));
        }
        bounds.push_back(n);
        for (std::size_t i = bounds.size() - 1; i > 0; --i) {
            merged.merge(sweep_range(s, eval, bounds[i - 1], bounds[i]));
        }
        EXPECT_EQ(merged.finish(), whole) << cuts;
    }
}

TEST(Characterize, StatisticInvariantsHold) {
    for (Unit u : {Unit::mitchell, Unit::corrected}) {
        for (Op op : {Op::mul, Op::div}) {
            const ErrorStats s = characterize(spec(u, op));
            EXPECT_GE(s.are, 0.0);
            EXPECT_LE(s.are, s.pre);
            EXPECT_GE(s.ned, 0.0);
            EXPECT_LE(s.ned, 1.0);
            EXPECT_LE(s.count_filtered, s.count);
            EXPECT_LE(s.are_filtered, s.pre_filtered);
        }
    }
}

TEST(Characterize, DivisionDefaultsToFullQuotientFraction) {
    SweepSpec s = spec(Unit::mitchell, Op::div, Width::w16, Sampling::uniform(1000, 3));
    s.divisor_width = Width::w8;
    EXPECT_EQ(s.quotient_bits(), 15u);
    s.quotient_frac_bits = 0;
    const ErrorStats integer = characterize(s);
    // Integer quotients drop every sub-unit quotient from the relative terms.
    EXPECT_GT(integer.zero_exact, 0u);
}

TEST(Characterize, SamplesStayInsideTheOperandRanges) {
    SweepSpec s = spec(Unit::mitchell, Op::div, Width::w16, Sampling::uniform(100000, 9));
    s.divisor_width = Width::w8;
    std::uint64_t max_a = 0, min_b = 1000, max_b = 0;
    for (std::uint64_t i = 0; i < s.sample_count(); ++i) {
        const auto [a, b] = sweep_operands(s, i);
        max_a = std::max(max_a, a);
        min_b = std::min(min_b, b);
        max_b = std::max(max_b, b);
    }
    EXPECT_LE(max_a, 65535u);
    EXPECT_GT(max_a, 65000u);
    EXPECT_EQ(min_b, 1u);
    EXPECT_EQ(max_b, 255u);
}

TEST(Ned, Examples) {
    const std::vector<double> same{3.0, 3.0, 3.0};
    EXPECT_DOUBLE_EQ(ned(same), 1.0);
    const std::vector<double> zeros{0.0, 0.0};
    EXPECT_EQ(ned(zeros), 0.0);
    const std::vector<double> mixed{1.0, -3.0, 0.0, 4.0};
    EXPECT_DOUBLE_EQ(ned(mixed), 2.0 / 4.0);
    EXPECT_THROW(ned(std::span<const double>{}), std::invalid_argument);
}

TEST(Ned, SweepValueMatchesListFormula) {
    const SweepSpec s = spec(Unit::mitchell, Op::mul);
    const Evaluator eval = Evaluator::for_spec(s);
    std::vector<double> dist;
    for (std::uint64_t i = 0; i < s.sample_count(); ++i) {
        const auto [a, b] = sweep_operands(s, i);
        const Sample x = eval(a, b);
        dist.push_back(static_cast<double>(x.exact) - static_cast<double>(x.approx));
    }
    EXPECT_NEAR(ned(dist), characterize(s).ned, 1e-14);
}

TEST(Heatmap, UncorrectedIsIndependentOfOperandScale) {
    for (Op op : {Op::mul, Op::div}) {
        HeatmapSpec h;
        h.arith = {Unit::mitchell, op};
        const Matrix base = heatmap(h);
        for (auto [k1, k2] : {std::pair{0, 0}, std::pair{11, 3}, std::pair{30, 29}}) {
            h.k1 = k1;
            h.k2 = k2;
            EXPECT_EQ(heatmap(h), base) << to_string(op) << " k=" << k1 << "," << k2;
        }
    }
}

TEST(Heatmap, MultiplierIsSymmetricAndDividerDiagonalVanishes) {
    HeatmapSpec h;
    h.arith = {Unit::mitchell, Op::mul};
    const Matrix mul = heatmap(h);
    h.arith = {Unit::mitchell, Op::div};
    const Matrix div = heatmap(h);
    for (unsigned r = 0; r < mul.rows; ++r) {
        EXPECT_LT(std::fabs(div.at(r, r)), 1e-9);
        for (unsigned c = 0; c < mul.cols; ++c) {
            EXPECT_NEAR(mul.at(r, c), mul.at(c, r), 1e-15);
        }
    }
}

TEST(Heatmap, CorrectionLowersThePeakCell) {
    for (Op op : {Op::mul, Op::div}) {
        HeatmapSpec h;
        h.arith = {Unit::mitchell, op};
        const double before = heatmap(h).max_abs();
        h.arith = {Unit::corrected, op};
        EXPECT_LT(heatmap(h).max_abs(), before) << to_string(op);
    }
}

TEST(Heatmap, IntegerPathTracksTheAnalyticPath) {
    HeatmapSpec h;
    h.arith = {Unit::mitchell, Op::mul};
    h.k1 = 12;
    h.k2 = 13;
    const Matrix analytic = heatmap(h);
    h.path = HeatmapPath::integer;
    const Matrix integer = heatmap(h);
    for (std::size_t i = 0; i < analytic.data.size(); ++i) {
        EXPECT_NEAR(analytic.data[i], integer.data[i], 2e-3);
    }
    h.k1 = 16;
    EXPECT_THROW(heatmap(h), std::invalid_argument);
}

TEST(Heatmap, RejectsSmallGrids) {
    HeatmapSpec h;
    h.grid = 15;
    EXPECT_THROW(heatmap(h), std::invalid_argument);
}

TEST(Csv, StatsRowFollowsHeaderColumns) {
    SweepSpec s = spec(Unit::corrected, Op::mul);
    std::ostringstream os;
    os << stats_csv_header() << '\n';
    write_stats_csv_row(os, s, characterize(s));
    const std::string text = os.str();
    EXPECT_EQ(text.rfind("op,width,sampling,seed,are,pre,ned,mean_signed,count,clamp_events,", 0), 0u);
    const auto line2 = text.substr(text.find('\n') + 1);
    EXPECT_EQ(line2.rfind("corrected-mul,8,exhaustive,0,", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.begin() + static_cast<long>(text.find('\n')), ','),
              std::count(line2.begin(), line2.end(), ','));
}

TEST(Csv, MatrixHasHeaderRowAndColumn) {
    HeatmapSpec h;
    h.grid = 16;
    std::ostringstream os;
    write_matrix_csv(os, heatmap(h));
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line.rfind("x1\\x2,0.03125,", 0), 0u);
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 16);
    }
    EXPECT_EQ(rows, 16);
}
