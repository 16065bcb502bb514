#pragma once

// Fully connected ReLU network for 28x28 digits: a float model with a small
// SGD trainer, and its 8-bit fixed-point form whose weight x activation
// products run through an 8x8 unsigned multiplier in sign-magnitude form.
//
// Fixed-point scales are powers of two. A layer holds int8 weights w*2^we,
// takes uint8 activations a*2^ei, accumulates exactly in int64 together with a
// bias pre-scaled to 2^(we+ei), and requantizes hidden outputs to uint8 at
// 2^eo with a rounding shift. Network inputs are raw pixels (ei = 8).

#include <simdive/apps/idx.hpp>
#include <simdive/apps/units.hpp>
#include <simdive/random.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace simdive {

inline constexpr unsigned ann_inputs = 784;
inline constexpr unsigned ann_classes = 10;
inline constexpr int ann_input_exponent = 8;

class ModelFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DenseLayer {
    unsigned inputs = 0;
    unsigned outputs = 0;
    std::vector<float> weights; ///< outputs x inputs, row-major
    std::vector<float> bias;
};

struct FloatModel {
    std::vector<DenseLayer> layers;

    /// Activations of every layer; the last entry holds the logits.
    std::vector<std::vector<float>> forward(const std::uint8_t* pixels) const {
        std::vector<std::vector<float>> acts;
        std::vector<float> in(ann_inputs);
        for (unsigned i = 0; i < ann_inputs; ++i) {
            in[i] = std::ldexp(static_cast<float>(pixels[i]), -ann_input_exponent);
        }
        const std::vector<float>* cur = &in;
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const DenseLayer& L = layers[l];
            std::vector<float> out(L.outputs);
            for (unsigned o = 0; o < L.outputs; ++o) {
                const float* row = L.weights.data() + std::size_t{o} * L.inputs;
                float s = L.bias[o];
                for (unsigned i = 0; i < L.inputs; ++i) {
                    s += row[i] * (*cur)[i];
                }
                out[o] = l + 1 < layers.size() ? std::max(0.0f, s) : s;
            }
            acts.push_back(std::move(out));
            cur = &acts.back();
        }
        return acts;
    }

    unsigned predict(const std::uint8_t* pixels) const {
        const auto acts = forward(pixels);
        const auto& logits = acts.back();
        return static_cast<unsigned>(std::max_element(logits.begin(), logits.end()) - logits.begin());
    }
};

struct TrainConfig {
    std::vector<unsigned> hidden{100};
    unsigned epochs = 10;
    unsigned batch = 16;
    float learning_rate = 0.05f;
    std::uint64_t seed = 7;
};

/// Plain minibatch SGD on softmax cross-entropy with He-initialized weights.
inline FloatModel train_float(const LabeledImages& data, const TrainConfig& cfg) {
    if (data.pixels_per_image != ann_inputs) {
        throw std::invalid_argument("training images must have 784 pixels");
    }
    if (data.count == 0 || cfg.batch == 0) {
        throw std::invalid_argument("training needs data and a positive batch size");
    }
    SplitMix64 rng(cfg.seed);
    FloatModel model;
    std::vector<unsigned> dims{ann_inputs};
    dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    dims.push_back(ann_classes);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer L{dims[l], dims[l + 1], std::vector<float>(std::size_t{dims[l]} * dims[l + 1]), std::vector<float>(dims[l + 1], 0.0f)};
        const double scale = std::sqrt(2.0 / dims[l]);
        for (auto& w : L.weights) {
            w = static_cast<float>(scale * rng.normal());
        }
        model.layers.push_back(std::move(L));
    }

    std::vector<std::size_t> order(data.count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::vector<float>> gw(model.layers.size());
    std::vector<std::vector<float>> gb(model.layers.size());
    for (unsigned epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[scale_to_range(rng(), 0, i)]);
        }
        for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
            const std::size_t end = std::min(order.size(), start + cfg.batch);
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                gw[l].assign(model.layers[l].weights.size(), 0.0f);
                gb[l].assign(model.layers[l].bias.size(), 0.0f);
            }
            for (std::size_t s = start; s < end; ++s) {
                const std::uint8_t* px = data.image(order[s]);
                const auto acts = model.forward(px);
                std::vector<float> input(ann_inputs);
                for (unsigned i = 0; i < ann_inputs; ++i) {
                    input[i] = std::ldexp(static_cast<float>(px[i]), -ann_input_exponent);
                }
                // softmax cross-entropy gradient at the logits
                const auto& logits = acts.back();
                const float mx = *std::max_element(logits.begin(), logits.end());
                std::vector<float> delta(logits.size());
                float z = 0.0f;
                for (std::size_t k = 0; k < logits.size(); ++k) {
                    delta[k] = std::exp(logits[k] - mx);
                    z += delta[k];
                }
                for (std::size_t k = 0; k < logits.size(); ++k) {
                    delta[k] = delta[k] / z - (k == data.labels[order[s]] ? 1.0f : 0.0f);
                }
                for (std::size_t l = model.layers.size(); l-- > 0;) {
                    const DenseLayer& L = model.layers[l];
                    const std::vector<float>& in = l == 0 ? input : acts[l - 1];
                    std::vector<float> back(L.inputs, 0.0f);
                    for (unsigned o = 0; o < L.outputs; ++o) {
                        const float d = delta[o];
                        gb[l][o] += d;
                        if (d == 0.0f) {
                            continue;
                        }
                        float* g = gw[l].data() + std::size_t{o} * L.inputs;
                        const float* w = L.weights.data() + std::size_t{o} * L.inputs;
                        for (unsigned i = 0; i < L.inputs; ++i) {
                            g[i] += d * in[i];
                            back[i] += d * w[i];
                        }
                    }
                    if (l > 0) {
                        for (unsigned i = 0; i < L.inputs; ++i) {
                            back[i] = in[i] > 0.0f ? back[i] : 0.0f;
                        }
                    }
                    delta = std::move(back);
                }
            }
            const float step = cfg.learning_rate / static_cast<float>(end - start);
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                auto& L = model.layers[l];
                for (std::size_t k = 0; k < L.weights.size(); ++k) {
                    L.weights[k] -= step * gw[l][k];
                }
                for (std::size_t k = 0; k < L.bias.size(); ++k) {
                    L.bias[k] -= step * gb[l][k];
                }
            }
        }
    }
    return model;
}

struct QuantLayer {
    unsigned inputs = 0;
    unsigned outputs = 0;
    std::vector<std::int8_t> weights; ///< outputs x inputs, row-major, value w * 2^weight_exponent
    std::vector<std::int32_t> bias;   ///< b * 2^(weight_exponent + input_exponent)
    int weight_exponent = 0;
    int input_exponent = 0;
    int output_exponent = 0; ///< hidden layers only
    bool relu = true;
};

struct QuantModel {
    std::vector<QuantLayer> layers;

    void validate() const {
        if (layers.empty()) {
            throw ModelFormatError("model has no layers");
        }
        if (layers.front().inputs != ann_inputs || layers.back().outputs != ann_classes) {
            throw ModelFormatError("model must map 784 inputs to 10 classes");
        }
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const QuantLayer& L = layers[l];
            if (L.weights.size() != std::size_t{L.inputs} * L.outputs || L.bias.size() != L.outputs) {
                throw ModelFormatError("layer " + std::to_string(l) + " weight or bias size does not match its dimensions");
            }
            if (l + 1 < layers.size()) {
                if (layers[l + 1].inputs != L.outputs) {
                    throw ModelFormatError("layer " + std::to_string(l + 1) + " input size does not chain");
                }
                if (layers[l + 1].input_exponent != L.output_exponent) {
                    throw ModelFormatError("layer " + std::to_string(l + 1) + " input exponent does not chain");
                }
            }
        }
        if (layers.front().input_exponent != ann_input_exponent) {
            throw ModelFormatError("first layer input exponent must be 8");
        }
    }
};

namespace detail {

/// Largest e with max_abs * 2^e <= limit.
inline int fit_exponent(double max_abs, double limit) {
    if (max_abs <= 0.0) {
        return 0;
    }
    return static_cast<int>(std::floor(std::log2(limit / max_abs)));
}

/// round(v / 2^shift) for shift >= 0, v * 2^-shift otherwise.
inline std::int64_t rounding_shift(std::int64_t v, int shift) {
    if (shift <= 0) {
        return v * (std::int64_t{1} << -shift);
    }
    return (v + (std::int64_t{1} << (shift - 1))) >> shift;
}

} // namespace detail

/// Per-layer power-of-two scales: weights from their largest magnitude,
/// hidden activations from their largest value over the calibration images.
inline QuantModel quantize(const FloatModel& model, const LabeledImages& calibration) {
    QuantModel q;
    std::vector<double> act_max(model.layers.size(), 0.0);
    for (std::size_t n = 0; n < calibration.count; ++n) {
        const auto acts = model.forward(calibration.image(n));
        for (std::size_t l = 0; l < acts.size(); ++l) {
            for (float v : acts[l]) {
                act_max[l] = std::max(act_max[l], static_cast<double>(v));
            }
        }
    }
    int in_exp = ann_input_exponent;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const DenseLayer& L = model.layers[l];
        QuantLayer Q;
        Q.inputs = L.inputs;
        Q.outputs = L.outputs;
        Q.input_exponent = in_exp;
        Q.relu = l + 1 < model.layers.size();
        double wmax = 0.0;
        for (float w : L.weights) {
            wmax = std::max(wmax, std::fabs(static_cast<double>(w)));
        }
        Q.weight_exponent = detail::fit_exponent(wmax, 127.0);
        for (float w : L.weights) {
            Q.weights.push_back(static_cast<std::int8_t>(std::clamp(std::lround(std::ldexp(w, Q.weight_exponent)), -127L, 127L)));
        }
        for (float b : L.bias) {
            Q.bias.push_back(static_cast<std::int32_t>(std::llround(std::ldexp(static_cast<double>(b), Q.weight_exponent + in_exp))));
        }
        if (Q.relu) {
            Q.output_exponent = detail::fit_exponent(act_max[l], 255.0);
            in_exp = Q.output_exponent;
        }
        q.layers.push_back(std::move(Q));
    }
    q.validate();
    return q;
}

/// Class scores (last-layer accumulators) for one image.
inline std::vector<std::int64_t> quant_forward(const QuantModel& model, const std::uint8_t* pixels, const Multiplier8& mul) {
    std::vector<std::uint8_t> act(pixels, pixels + model.layers.front().inputs);
    std::vector<std::int64_t> acc;
    for (const QuantLayer& L : model.layers) {
        acc.assign(L.outputs, 0);
        for (unsigned o = 0; o < L.outputs; ++o) {
            const std::int8_t* row = L.weights.data() + std::size_t{o} * L.inputs;
            std::int64_t s = L.bias[o];
            for (unsigned i = 0; i < L.inputs; ++i) {
                const int w = row[i];
                const auto p = static_cast<std::int64_t>(mul(static_cast<std::uint8_t>(w < 0 ? -w : w), act[i]));
                s += w < 0 ? -p : p;
            }
            acc[o] = s;
        }
        if (L.relu) {
            const int shift = L.weight_exponent + L.input_exponent - L.output_exponent;
            act.resize(L.outputs);
            for (unsigned o = 0; o < L.outputs; ++o) {
                act[o] = static_cast<std::uint8_t>(std::clamp<std::int64_t>(detail::rounding_shift(acc[o], shift), 0, 255));
            }
        }
    }
    return acc;
}

/// Index of the first maximal score.
inline unsigned argmax(const std::vector<std::int64_t>& scores) {
    return static_cast<unsigned>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

struct AnnResult {
    std::size_t correct = 0;
    std::size_t count = 0;
    double accuracy() const { return count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0; }
};

inline void require_dataset_matches(const LabeledImages& data) {
    if (data.pixels_per_image != ann_inputs) {
        throw std::invalid_argument("dataset images have " + std::to_string(data.pixels_per_image) + " pixels, model expects 784");
    }
}

/// Top-1 accuracy of the fixed-point model; identical for any thread count.
inline AnnResult ann_infer(const QuantModel& model, const LabeledImages& data, const Multiplier8& mul, unsigned threads = 1) {
    model.validate();
    require_dataset_matches(data);
    std::vector<std::uint8_t> hit(data.count, 0);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t n = begin; n < end; ++n) {
            hit[n] = argmax(quant_forward(model, data.image(n), mul)) == data.labels[n];
        }
    };
    threads = std::max(1u, threads);
    if (threads == 1) {
        work(0, data.count);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (data.count + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = std::min(data.count, t * chunk);
            pool.emplace_back(work, begin, std::min(data.count, begin + chunk));
        }
    }
    return {static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1)), data.count};
}

inline AnnResult float_infer(const FloatModel& model, const LabeledImages& data) {
    require_dataset_matches(data);
    AnnResult r{0, data.count};
    for (std::size_t n = 0; n < data.count; ++n) {
        r.correct += model.predict(data.image(n)) == data.labels[n];
    }
    return r;
}

// ---------------------------------------------------------------------------
// JSON model files
// ---------------------------------------------------------------------------

inline constexpr const char* float_model_format = "simdive-ann-float";
inline constexpr const char* quant_model_format = "simdive-ann-q8";

inline nlohmann::json to_json(const FloatModel& m) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& L : m.layers) {
        layers.push_back({{"inputs", L.inputs}, {"outputs", L.outputs}, {"weights", L.weights}, {"bias", L.bias}});
    }
    return {{"format", float_model_format}, {"layers", layers}};
}

inline nlohmann::json to_json(const QuantModel& m) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& L : m.layers) {
        nlohmann::json j{{"inputs", L.inputs},
                         {"outputs", L.outputs},
                         {"weight_exponent", L.weight_exponent},
                         {"input_exponent", L.input_exponent},
                         {"relu", L.relu},
                         {"weights", L.weights},
                         {"bias", L.bias}};
        if (L.relu) {
            j["output_exponent"] = L.output_exponent;
        }
        layers.push_back(std::move(j));
    }
    return {{"format", quant_model_format}, {"layers", layers}};
}

namespace detail {

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ModelFormatError(path + ": " + e.what());
    }
}

inline void require_format(const nlohmann::json& j, const char* format) {
    if (!j.is_object() || j.value("format", "") != format) {
        throw ModelFormatError(std::string("expected a model with format '") + format + "'");
    }
}

} // namespace detail

inline FloatModel float_model_from_json(const nlohmann::json& j) {
    detail::require_format(j, float_model_format);
    FloatModel m;
    try {
        for (const auto& l : j.at("layers")) {
            m.layers.push_back({l.at("inputs").get<unsigned>(), l.at("outputs").get<unsigned>(), l.at("weights").get<std::vector<float>>(),
                                l.at("bias").get<std::vector<float>>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ModelFormatError(e.what());
    }
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const auto& L = m.layers[l];
        if (L.weights.size() != std::size_t{L.inputs} * L.outputs || L.bias.size() != L.outputs ||
            (l > 0 && m.layers[l - 1].outputs != L.inputs)) {
            throw ModelFormatError("layer " + std::to_string(l) + " dimensions are inconsistent");
        }
    }
    if (m.layers.empty() || m.layers.front().inputs != ann_inputs || m.layers.back().outputs != ann_classes) {
        throw ModelFormatError("model must map 784 inputs to 10 classes");
    }
    return m;
}

inline QuantModel quant_model_from_json(const nlohmann::json& j) {
    detail::require_format(j, quant_model_format);
    QuantModel m;
    try {
        for (const auto& l : j.at("layers")) {
            QuantLayer L;
            L.inputs = l.at("inputs").get<unsigned>();
            L.outputs = l.at("outputs").get<unsigned>();
            L.weight_exponent = l.at("weight_exponent").get<int>();
            L.input_exponent = l.at("input_exponent").get<int>();
            L.relu = l.at("relu").get<bool>();
            if (L.relu) {
                L.output_exponent = l.at("output_exponent").get<int>();
            }
            for (int w : l.at("weights").get<std::vector<int>>()) {
                if (w < -127 || w > 127) {
                    throw ModelFormatError("weight " + std::to_string(w) + " outside int8 range");
                }
                L.weights.push_back(static_cast<std::int8_t>(w));
            }
            L.bias = l.at("bias").get<std::vector<std::int32_t>>();
            m.layers.push_back(std::move(L));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ModelFormatError(e.what());
    }
    m.validate();
    return m;
}

inline FloatModel load_float_model(const std::string& path) { return float_model_from_json(detail::read_json_file(path)); }
inline QuantModel load_quant_model(const std::string& path) { return quant_model_from_json(detail::read_json_file(path)); }

inline void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    out << j.dump() << '\n';
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
}

} // namespace simdive
