#pragma once

// IDX (MNIST) container: 0x00 0x00, element type, dimension count, then
// big-endian uint32 dimensions and the payload. Only unsigned-byte payloads.

#include <simdive/apps/image.hpp>
#include <simdive/apps/parse_error.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace simdive {

struct IdxArray {
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> data;

    std::size_t items() const { return dims.empty() ? 0 : dims[0]; }
    /// Elements per item (product of the trailing dimensions).
    std::size_t item_size() const {
        std::size_t n = 1;
        for (std::size_t i = 1; i < dims.size(); ++i) {
            n *= dims[i];
        }
        return n;
    }
};

inline IdxArray parse_idx(const std::vector<std::uint8_t>& bytes, const std::string& source = "idx") {
    if (bytes.size() < 4) {
        throw ParseError(source, bytes.size(), "truncated magic number");
    }
    if (bytes[0] != 0 || bytes[1] != 0) {
        throw ParseError(source, 0, "bad magic number");
    }
    if (bytes[2] != 0x08) {
        throw ParseError(source, 2, "unsupported element type 0x" + std::to_string(bytes[2]) + " (only unsigned byte 0x08)");
    }
    const unsigned ndims = bytes[3];
    if (ndims == 0) {
        throw ParseError(source, 3, "zero dimensions");
    }
    IdxArray out;
    std::size_t pos = 4;
    std::uint64_t total = 1;
    for (unsigned d = 0; d < ndims; ++d) {
        if (bytes.size() - pos < 4) {
            throw ParseError(source, bytes.size(), "truncated dimension " + std::to_string(d));
        }
        const std::uint32_t v = (std::uint32_t{bytes[pos]} << 24) | (std::uint32_t{bytes[pos + 1]} << 16) |
                                (std::uint32_t{bytes[pos + 2]} << 8) | bytes[pos + 3];
        out.dims.push_back(v);
        total *= v;
        if (total > (std::uint64_t{1} << 40)) {
            throw ParseError(source, pos, "dimensions too large");
        }
        pos += 4;
    }
    if (bytes.size() - pos < total) {
        throw ParseError(source, bytes.size(), "truncated payload (" + std::to_string(bytes.size() - pos) + " of " +
                                                   std::to_string(total) + " bytes)");
    }
    out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.begin() + static_cast<std::ptrdiff_t>(pos + total));
    return out;
}

inline IdxArray load_idx(const std::string& path) { return parse_idx(read_file_bytes(path), path); }

inline std::vector<std::uint8_t> encode_idx(const IdxArray& a) {
    std::vector<std::uint8_t> out{0, 0, 0x08, static_cast<std::uint8_t>(a.dims.size())};
    for (std::uint32_t d : a.dims) {
        for (int s = 24; s >= 0; s -= 8) {
            out.push_back(static_cast<std::uint8_t>(d >> s));
        }
    }
    out.insert(out.end(), a.data.begin(), a.data.end());
    return out;
}

/// Images flattened to item_size bytes each, with matching labels.
struct LabeledImages {
    std::size_t count = 0;
    std::size_t pixels_per_image = 0;
    std::vector<std::uint8_t> pixels;
    std::vector<std::uint8_t> labels;

    const std::uint8_t* image(std::size_t i) const { return pixels.data() + i * pixels_per_image; }
};

/// limit = 0 keeps every image.
inline LabeledImages load_mnist(const std::string& images_path, const std::string& labels_path, std::size_t limit = 0) {
    const IdxArray images = load_idx(images_path);
    const IdxArray labels = load_idx(labels_path);
    if (images.dims.size() != 3) {
        throw ParseError(images_path, 3, "expected a 3-dimensional image array");
    }
    if (labels.dims.size() != 1) {
        throw ParseError(labels_path, 3, "expected a 1-dimensional label array");
    }
    if (images.items() != labels.items()) {
        throw std::invalid_argument("image and label counts differ: " + std::to_string(images.items()) + " vs " +
                                    std::to_string(labels.items()));
    }
    LabeledImages out;
    out.count = limit == 0 ? images.items() : std::min(limit, images.items());
    out.pixels_per_image = images.item_size();
    out.pixels.assign(images.data.begin(), images.data.begin() + static_cast<std::ptrdiff_t>(out.count * out.pixels_per_image));
    out.labels.assign(labels.data.begin(), labels.data.begin() + static_cast<std::ptrdiff_t>(out.count));
    return out;
}

} // namespace simdive
