#pragma once

#include <simdive/apps/parse_error.hpp>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace simdive {

struct GrayImage {
    unsigned width = 0;
    unsigned height = 0;
    std::vector<std::uint8_t> pixels; ///< row-major

    GrayImage() = default;
    GrayImage(unsigned w, unsigned h, std::uint8_t fill = 0) : width(w), height(h), pixels(std::size_t{w} * h, fill) {}
    GrayImage(unsigned w, unsigned h, std::vector<std::uint8_t> px) : width(w), height(h), pixels(std::move(px)) {
        if (pixels.size() != std::size_t{w} * h) {
            throw std::invalid_argument("pixel count does not match image dimensions");
        }
    }

    std::uint8_t at(unsigned x, unsigned y) const { return pixels[std::size_t{y} * width + x]; }
    std::uint8_t& at(unsigned x, unsigned y) { return pixels[std::size_t{y} * width + x]; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

inline void require_same_shape(const GrayImage& a, const GrayImage& b) {
    if (a.width != b.width || a.height != b.height) {
        throw std::invalid_argument("image dimensions differ: " + std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                                    std::to_string(b.width) + "x" + std::to_string(b.height));
    }
}

/// Parses a binary (P5) PGM with maxval 255.
inline GrayImage parse_pgm(const std::vector<std::uint8_t>& bytes, const std::string& source = "pgm") {
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') {
                    ++pos;
                }
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_uint = [&](const char* what) {
        skip_space();
        const std::size_t start = pos;
        std::uint64_t v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos] - '0');
            if (v > std::numeric_limits<std::uint32_t>::max()) {
                throw ParseError(source, start, std::string(what) + " is too large");
            }
            ++pos;
        }
        if (pos == start) {
            throw ParseError(source, start, std::string("expected ") + what);
        }
        return static_cast<unsigned>(v);
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        throw ParseError(source, 0, "missing P5 magic");
    }
    pos = 2;
    const unsigned w = read_uint("width");
    const unsigned h = read_uint("height");
    const std::size_t maxval_at = (skip_space(), pos);
    const unsigned maxval = read_uint("maxval");
    if (w == 0 || h == 0) {
        throw ParseError(source, maxval_at, "zero image dimension");
    }
    if (maxval != 255) {
        throw ParseError(source, maxval_at, "unsupported bit depth (maxval " + std::to_string(maxval) + ", expected 255)");
    }
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
        throw ParseError(source, pos, "expected whitespace after header");
    }
    ++pos;
    const std::size_t need = std::size_t{w} * h;
    if (bytes.size() - pos < need) {
        throw ParseError(source, bytes.size(), "truncated pixel data (" + std::to_string(bytes.size() - pos) + " of " +
                                                   std::to_string(need) + " bytes)");
    }
    return GrayImage{w, h, std::vector<std::uint8_t>(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                                     bytes.begin() + static_cast<std::ptrdiff_t>(pos + need))};
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline GrayImage load_pgm(const std::string& path) { return parse_pgm(read_file_bytes(path), path); }

inline std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
    const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

inline void save_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    const auto bytes = encode_pgm(img);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
}

inline double mse(const GrayImage& a, const GrayImage& b) {
    require_same_shape(a, b);
    if (a.pixels.empty()) {
        throw std::invalid_argument("empty image");
    }
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const int d = int{a.pixels[i]} - int{b.pixels[i]};
        sum += static_cast<std::uint64_t>(d * d);
    }
    return static_cast<double>(sum) / static_cast<double>(a.pixels.size());
}

/// 10 log10(255^2 / MSE); +infinity for identical images.
inline double psnr(const GrayImage& ref, const GrayImage& test) {
    const double e = mse(ref, test);
    if (e == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(255.0 * 255.0 / e);
}

} // namespace simdive
