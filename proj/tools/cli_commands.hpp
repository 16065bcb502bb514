#pragma once

// The simdive command-line tool. run() parses arguments, executes one
// subcommand and returns the process exit code: 0 on success, 1 when the
// command fails on its inputs, 2 on a usage error.

#include <simdive.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#ifndef SIMDIVE_DATA_DIR
#define SIMDIVE_DATA_DIR "data"
#endif

namespace simdive::cli {

using nlohmann::json;

inline constexpr std::uint64_t default_seed = 1;
inline constexpr std::uint64_t default_noise_seed = 2020;

inline std::string data_path(const std::string& rel) { return std::string(SIMDIVE_DATA_DIR) + "/" + rel; }

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Command failed on its inputs (exit code 1).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DomainError("cannot write " + path);
    }
    return out;
}

/// JSON-safe number: non-finite values become strings ("inf").
inline json number(double v) {
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (std::isnan(v)) {
        return "nan";
    }
    return v;
}

inline json stats_json(const ErrorStats& s, Op op) {
    json j{{"are_pct", s.are},
           {"pre_pct", s.pre},
           {"ned", s.ned},
           {"mean_signed_pct", s.mean_signed},
           {"count", s.count},
           {"zero_exact", s.zero_exact},
           {"clamp_events", s.clamp_events}};
    if (op == Op::div) {
        j["dividend_ge_divisor"] = {{"are_pct", s.are_filtered}, {"pre_pct", s.pre_filtered}, {"count", s.count_filtered}};
    }
    return j;
}

struct Options {
    // gen-table
    std::string table_mode = "mul";
    unsigned region_bits = 3;
    unsigned coeff_bits = 6;
    std::string out;
    // characterize / heatmap
    std::string op = "mitchell-mul";
    unsigned width = 8;
    std::string samples = "auto";
    std::uint64_t seed = default_seed;
    unsigned divisor_width = 0;
    int quotient_frac_bits = -1;
    unsigned threads = default_threads();
    std::string csv;
    unsigned grid = 64;
    int k1 = 5;
    int k2 = 5;
    std::string heatmap_path = "analytic";
    // apps
    std::string image_a;
    std::string image_b;
    std::string image;
    std::string mul = "corrected";
    std::string arith = "hybrid";
    std::string approx = "corrected";
    double sigma = 25.0;
    std::uint64_t noise_seed = default_noise_seed;
    std::string model = data_path("models/ann-q8.json");
    std::string images = data_path("mnist/test-1k-images-idx3-ubyte");
    std::string labels = data_path("mnist/test-1k-labels-idx1-ubyte");
    std::size_t limit = 1000;
    // train-ann
    unsigned epochs = 10;
    unsigned batch = 16;
    float learning_rate = 0.05f;
    std::uint64_t train_seed = 7;
    unsigned hidden = 100;
    std::string out_float = data_path("models/ann-float.json");
    std::string out_q8 = data_path("models/ann-q8.json");
};

inline json cmd_gen_table(const Options& o) {
    const Op mode = o.table_mode == "mul" ? Op::mul : Op::div;
    const CorrectionTable table = build_table(mode, o.region_bits, o.coeff_bits);
    auto f = open_output(o.out);
    write_table_csv(f, table);
    return {{"rows", table.entries().size()}, {"out", o.out}};
}

inline SweepSpec sweep_spec(const Options& o) {
    SweepSpec s;
    s.arith = Arithmetic::parse(o.op);
    s.width = width_from_bits(o.width);
    if (o.divisor_width != 0) {
        s.divisor_width = width_from_bits(o.divisor_width);
    }
    if (o.quotient_frac_bits >= 0) {
        s.quotient_frac_bits = static_cast<unsigned>(o.quotient_frac_bits);
    }
    s.region_bits = o.region_bits;
    s.coeff_bits = o.coeff_bits;
    s.threads = o.threads;
    if (o.samples == "exhaustive") {
        s.sampling = Sampling::exhaustive();
    } else if (o.samples == "auto") {
        s.sampling = Sampling::exhaustive();
        if (s.space_size() > SweepSpec::max_exhaustive_pairs) {
            s.sampling = Sampling::uniform(1000000, o.seed);
        }
    } else {
        s.sampling = Sampling::uniform(std::stoull(o.samples), o.seed);
    }
    return s;
}

inline json cmd_characterize(const Options& o, json& params) {
    const SweepSpec spec = sweep_spec(o);
    const ErrorStats stats = characterize(spec);
    params["sampling"] = spec.sampling.name();
    params["sample_count"] = spec.sample_count();
    params["divisor_width"] = bits(spec.second_width());
    params["quotient_frac_bits"] = spec.quotient_bits();
    params["prng"] = "splitmix64";
    if (!o.csv.empty()) {
        auto f = open_output(o.csv);
        f << stats_csv_header() << '\n';
        write_stats_csv_row(f, spec, stats);
    }
    return stats_json(stats, spec.arith.op);
}

inline json cmd_heatmap(const Options& o) {
    HeatmapSpec h;
    h.arith = Arithmetic::parse(o.op);
    h.grid = o.grid;
    h.k1 = o.k1;
    h.k2 = o.k2;
    h.path = o.heatmap_path == "integer" ? HeatmapPath::integer : HeatmapPath::analytic;
    h.width = width_from_bits(o.width == 8 ? 16 : o.width);
    h.region_bits = o.region_bits;
    h.coeff_bits = o.coeff_bits;
    const Matrix m = heatmap(h);
    auto f = open_output(o.out);
    write_matrix_csv(f, m);
    double mean = 0.0;
    for (double v : m.data) {
        mean += std::fabs(v);
    }
    return {{"rows", m.rows}, {"cols", m.cols}, {"max_abs", m.max_abs()}, {"mean_abs", mean / static_cast<double>(m.data.size())}, {"out", o.out}};
}

inline json cmd_blend(const Options& o) {
    const GrayImage a = load_pgm(o.image_a);
    const GrayImage b = load_pgm(o.image_b);
    const Multiplier8 mul(parse_unit(o.mul), o.region_bits, o.coeff_bits);
    const GrayImage out = blend(a, b, mul);
    const GrayImage ref = blend(a, b, Multiplier8(Unit::exact));
    if (!o.out.empty()) {
        save_pgm(o.out, out);
    }
    return {{"width", out.width}, {"height", out.height}, {"psnr_vs_exact_db", number(psnr(ref, out))}};
}

inline json cmd_smooth(const Options& o) {
    const GrayImage clean = load_pgm(o.image);
    const SmoothMode mode = parse_smooth_mode(o.arith);
    const Unit approx = parse_unit(o.approx);
    if (approx == Unit::exact) {
        throw DomainError("--approx must name an approximate unit (mitchell or corrected)");
    }
    const GrayImage noisy = add_gaussian_noise(clean, o.sigma, o.noise_seed);
    const GrayImage exact = gaussian_smooth(noisy, SmoothUnits::make(SmoothMode::exact));
    const GrayImage approx_out = gaussian_smooth(noisy, SmoothUnits::make(mode, approx, o.region_bits, o.coeff_bits));
    struct Row {
        std::string variant;
        double db;
    };
    const std::vector<Row> rows{{"noisy", psnr(clean, noisy)}, {"exact", psnr(clean, exact)}, {to_string(mode), psnr(clean, approx_out)}};
    if (!o.csv.empty()) {
        auto f = open_output(o.csv);
        f << "variant,psnr_db\n";
        f.precision(10);
        for (const auto& r : rows) {
            f << r.variant << ',' << r.db << '\n';
        }
    }
    if (!o.out.empty()) {
        save_pgm(o.out, approx_out);
    }
    json res = json::object();
    for (const auto& r : rows) {
        res["psnr_db"][r.variant] = number(r.db);
    }
    return res;
}

inline json cmd_ann(const Options& o) {
    const QuantModel model = load_quant_model(o.model);
    const LabeledImages data = load_mnist(o.images, o.labels, o.limit);
    const Multiplier8 mul(parse_unit(o.mul), o.region_bits, o.coeff_bits);
    const AnnResult r = ann_infer(model, data, mul, o.threads);
    if (!o.csv.empty()) {
        auto f = open_output(o.csv);
        f << "mul,images,correct,accuracy\n" << o.mul << ',' << r.count << ',' << r.correct << ',' << r.accuracy() << '\n';
    }
    return {{"images", r.count}, {"correct", r.correct}, {"accuracy", r.accuracy()}};
}

inline json cmd_train_ann(const Options& o) {
    const LabeledImages train = load_mnist(o.images, o.labels);
    TrainConfig cfg;
    cfg.hidden = {o.hidden};
    cfg.epochs = o.epochs;
    cfg.batch = o.batch;
    cfg.learning_rate = o.learning_rate;
    cfg.seed = o.train_seed;
    const FloatModel fm = train_float(train, cfg);
    const QuantModel qm = quantize(fm, train);
    save_json(o.out_float, to_json(fm));
    save_json(o.out_q8, to_json(qm));
    return {{"train_images", train.count},
            {"train_accuracy_float", float_infer(fm, train).accuracy()},
            {"train_accuracy_q8_exact", ann_infer(qm, train, Multiplier8(Unit::exact)).accuracy()}};
}

inline const char* stats_columns_help() {
    return "Stats CSV columns (--csv), in order: op,width,sampling,seed,are,pre,ned,mean_signed,count,clamp_events,"
           "divisor_width,quotient_frac_bits,region_bits,coeff_bits,zero_exact,are_filtered,pre_filtered,count_filtered. "
           "are/pre/mean_signed are percentages; *_filtered restrict division to dividend >= divisor.";
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Logarithmic approximate multiplier/divider toolkit", "simdive"};
    app.require_subcommand(1);
    Options o;
    const auto arith_names = Arithmetic::names();
    const std::vector<std::string> unit_names{"exact", "mitchell", "corrected"};

    auto add_table_opts = [&](CLI::App* c) {
        c->add_option("--region-bits", o.region_bits, "Region index bits m (1-4)")->check(CLI::Range(1u, 4u))->capture_default_str();
        c->add_option("--coeff-bits", o.coeff_bits, "Coefficient fraction bits n (1-16)")->check(CLI::Range(1u, 16u))->capture_default_str();
    };
    auto add_threads = [&](CLI::App* c) {
        c->add_option("--threads", o.threads, "Worker threads; never changes results (default: all cores)")->check(CLI::Range(1u, 1024u));
    };

    auto* gen = app.add_subcommand("gen-table", "Write an error-correction coefficient table as CSV");
    gen->add_option("--mode", o.table_mode, "mul or div")->check(CLI::IsMember({"mul", "div"}))->capture_default_str();
    add_table_opts(gen);
    gen->add_option("--out", o.out, "Output CSV path")->required();

    auto* chr = app.add_subcommand("characterize", "Error statistics of an arithmetic unit over an operand sweep");
    chr->footer(stats_columns_help());
    chr->add_option("--op", o.op, "Unit: exact|mitchell|corrected followed by -mul|-div")->check(CLI::IsMember(arith_names))->capture_default_str();
    chr->add_option("--width", o.width, "Operand width")->check(CLI::IsMember({8u, 16u, 32u}))->capture_default_str();
    chr->add_option("--samples", o.samples,
                    "'exhaustive', a sample count, or 'auto' (exhaustive up to 2^24 pairs, else 10^6 samples)")
        ->check(CLI::Validator(
            [](std::string& v) -> std::string {
                if (v == "exhaustive" || v == "auto") {
                    return {};
                }
                if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos || v.size() > 12 || std::stoull(v) == 0) {
                    return "expected 'exhaustive', 'auto' or a positive sample count";
                }
                return {};
            },
            "SAMPLES"))
        ->capture_default_str();
    chr->add_option("--seed", o.seed, "SplitMix64 seed for random sampling")->capture_default_str();
    chr->add_option("--divisor-width", o.divisor_width, "Narrower divisor width for division sweeps")->check(CLI::IsMember({8u, 16u, 32u}));
    chr->add_option("--quotient-frac-bits", o.quotient_frac_bits, "Quotient fraction bits (default: width-1)")->check(CLI::Range(0, 32));
    add_table_opts(chr);
    add_threads(chr);
    chr->add_option("--csv", o.csv, "Also write a stats CSV row here");

    auto* hm = app.add_subcommand("heatmap", "Relative-error heatmap over the (x1, x2) fraction grid as CSV");
    hm->footer("CSV layout: first row 'x1\\x2' then x2 cell centres; each following row starts with its x1 cell centre.");
    hm->add_option("--op", o.op, "Unit: exact|mitchell|corrected followed by -mul|-div")->check(CLI::IsMember(arith_names))->capture_default_str();
    hm->add_option("--grid", o.grid, "Cells per axis (>= 16)")->check(CLI::Range(16u, 4096u))->capture_default_str();
    hm->add_option("--k1", o.k1, "Leading-one position of the first operand")->capture_default_str();
    hm->add_option("--k2", o.k2, "Leading-one position of the second operand")->capture_default_str();
    hm->add_option("--path", o.heatmap_path, "analytic (real-valued) or integer (bit-accurate)")
        ->check(CLI::IsMember({"analytic", "integer"}))
        ->capture_default_str();
    hm->add_option("--width", o.width, "Operand width on the integer path (8 selects 16)")->check(CLI::IsMember({8u, 16u, 32u}));
    add_table_opts(hm);
    hm->add_option("--out", o.out, "Output CSV path")->required();

    auto* bl = app.add_subcommand("blend", "Multiply-blend two PGM images: out = mul(a, b) / 255");
    bl->add_option("--image-a", o.image_a, "First P5 PGM")->required();
    bl->add_option("--image-b", o.image_b, "Second P5 PGM")->required();
    bl->add_option("--mul", o.mul, "Multiplier")->check(CLI::IsMember(unit_names))->capture_default_str();
    add_table_opts(bl);
    bl->add_option("--out", o.out, "Write the blended PGM here");

    auto* sm = app.add_subcommand("smooth", "Denoise a noisy PGM with the 3x3 Gaussian filter");
    sm->footer("CSV (--csv): variant,psnr_db rows for the noisy input, the exact filter and the chosen mode, all against the clean image.");
    sm->add_option("--image", o.image, "Clean P5 PGM")->required();
    sm->add_option("--arith", o.arith, "exact, div-only or hybrid")->check(CLI::IsMember({"exact", "div-only", "hybrid"}))->capture_default_str();
    sm->add_option("--approx", o.approx, "Approximate unit family")->check(CLI::IsMember({"mitchell", "corrected"}))->capture_default_str();
    sm->add_option("--sigma", o.sigma, "Noise standard deviation")->check(CLI::Range(0.0, 255.0))->capture_default_str();
    sm->add_option("--seed", o.noise_seed, "Noise seed")->capture_default_str();
    add_table_opts(sm);
    sm->add_option("--csv", o.csv, "Write PSNR rows here");
    sm->add_option("--out", o.out, "Write the filtered PGM here");

    auto* an = app.add_subcommand("ann", "8-bit fixed-point MLP accuracy on MNIST with a chosen multiplier");
    an->add_option("--model", o.model, "Quantized model JSON")->capture_default_str();
    an->add_option("--images", o.images, "IDX image file")->capture_default_str();
    an->add_option("--labels", o.labels, "IDX label file")->capture_default_str();
    an->add_option("--mul", o.mul, "Multiplier")->check(CLI::IsMember(unit_names))->capture_default_str();
    an->add_option("--limit", o.limit, "Images to evaluate (0 = all)")->capture_default_str();
    add_table_opts(an);
    add_threads(an);
    an->add_option("--csv", o.csv, "Write an accuracy row here");

    auto* tr = app.add_subcommand("train-ann", "Train the float MLP and write float and quantized model JSON");
    tr->add_option("--images", o.images, "IDX training images")->required();
    tr->add_option("--labels", o.labels, "IDX training labels")->required();
    tr->add_option("--hidden", o.hidden, "Hidden layer size")->check(CLI::Range(1u, 4096u))->capture_default_str();
    tr->add_option("--epochs", o.epochs, "Training epochs")->check(CLI::Range(1u, 1000u))->capture_default_str();
    tr->add_option("--batch", o.batch, "Minibatch size")->check(CLI::Range(1u, 65536u))->capture_default_str();
    tr->add_option("--lr", o.learning_rate, "Learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    tr->add_option("--seed", o.train_seed, "Initialization and shuffling seed")->capture_default_str();
    tr->add_option("--out-float", o.out_float, "Float model output")->capture_default_str();
    tr->add_option("--out-q8", o.out_q8, "Quantized model output")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    auto* cmd = app.get_subcommands().front();
    json params = json::object();
    for (const CLI::Option* opt : cmd->get_options()) {
        if (opt->get_name() == "--help" || opt->get_name().empty()) {
            continue;
        }
        const auto results = opt->results();
        std::string key = opt->get_name();
        key = key.substr(key.find_first_not_of('-'));
        params[key] = results.empty() ? opt->get_default_str() : results.front();
    }
    params.erase("threads");

    const auto start = std::chrono::steady_clock::now();
    json results;
    try {
        const std::string name = cmd->get_name();
        if (name == "gen-table") {
            results = cmd_gen_table(o);
        } else if (name == "characterize") {
            results = cmd_characterize(o, params);
        } else if (name == "heatmap") {
            results = cmd_heatmap(o);
        } else if (name == "blend") {
            results = cmd_blend(o);
        } else if (name == "smooth") {
            results = cmd_smooth(o);
        } else if (name == "ann") {
            results = cmd_ann(o);
        } else {
            results = cmd_train_ann(o);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json report{{"command", cmd->get_name()}, {"parameters", params}, {"results", results}, {"duration_s", seconds}};
    out << report.dump(2) << '\n';
    return 0;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"simdive"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace simdive::cli
