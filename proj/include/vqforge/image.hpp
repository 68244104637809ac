// Grayscale image container, binary PGM (P5) I/O, and block <-> image
// conversion for vector quantization.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vqforge {

struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, width*height entries

    bool operator==(const GrayImage&) const = default;
};

// Non-overlapping n x n blocks of an image, each flattened row-major to a
// dim = n*n vector, in raster order of blocks.
struct TrainingSet {
    std::size_t dim = 0;
    std::vector<std::vector<double>> vectors;
    std::size_t source_width = 0;
    std::size_t source_height = 0;
    std::size_t block_side = 0;
};

class ImageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Reads one whitespace-delimited header token, skipping '#' comment lines.
inline std::string pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
        } else if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
        } else if (!tok.empty()) {
            return tok;
        }
    }
    return tok;
}

}  // namespace detail

inline GrayImage load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError("cannot open image file: " + path);

    std::string magic = detail::pgm_token(in);
    if (magic != "P5") throw ImageError("not a binary PGM (expected P5): " + path);

    auto read_dim = [&](const char* what) -> std::size_t {
        std::string tok = detail::pgm_token(in);
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(tok, &pos);
        } catch (...) {
            throw ImageError(std::string("malformed PGM header: bad ") + what + " in " + path);
        }
        if (pos != tok.size() || v == 0)
            throw ImageError(std::string("malformed PGM header: bad ") + what + " in " + path);
        return static_cast<std::size_t>(v);
    };

    GrayImage img;
    img.width = read_dim("width");
    img.height = read_dim("height");
    std::size_t maxval = read_dim("maxval");
    if (maxval != 255) throw ImageError("unsupported PGM maxval (want 255): " + path);

    // The single whitespace byte after maxval was consumed by pgm_token.
    img.pixels.resize(img.width * img.height);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (static_cast<std::size_t>(in.gcount()) != img.pixels.size())
        throw ImageError("truncated PGM pixel data: " + path);
    return img;
}

inline void save_image(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ImageError("cannot write image file: " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw ImageError("write failed: " + path);
}

inline TrainingSet extract_blocks(const GrayImage& img, std::size_t n) {
    if (n == 0 || img.width % n != 0 || img.height % n != 0)
        throw ImageError("block side " + std::to_string(n) +
                         " does not divide image dimensions");
    TrainingSet ts;
    ts.dim = n * n;
    ts.source_width = img.width;
    ts.source_height = img.height;
    ts.block_side = n;
    const std::size_t bw = img.width / n;
    const std::size_t bh = img.height / n;
    ts.vectors.reserve(bw * bh);
    for (std::size_t by = 0; by < bh; ++by) {
        for (std::size_t bx = 0; bx < bw; ++bx) {
            std::vector<double> v(ts.dim);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c)
                    v[r * n + c] =
                        img.pixels[(by * n + r) * img.width + bx * n + c];
            ts.vectors.push_back(std::move(v));
        }
    }
    return ts;
}

// Rounds half-up and clamps to [0,255].
inline std::uint8_t quantize_pixel(double v) {
    double r = std::floor(v + 0.5);
    if (r < 0.0) return 0;
    if (r > 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

inline GrayImage assemble_blocks(const TrainingSet& ts) {
    const std::size_t n = ts.block_side;
    if (n == 0 || ts.dim != n * n || ts.source_width % n != 0 ||
        ts.source_height % n != 0)
        throw ImageError("training set geometry is inconsistent");
    const std::size_t bw = ts.source_width / n;
    const std::size_t bh = ts.source_height / n;
    if (ts.vectors.size() != bw * bh)
        throw ImageError("block count does not match source geometry");

    GrayImage img;
    img.width = ts.source_width;
    img.height = ts.source_height;
    img.pixels.resize(img.width * img.height);
    for (std::size_t b = 0; b < ts.vectors.size(); ++b) {
        const auto& v = ts.vectors[b];
        if (v.size() != ts.dim) throw ImageError("block dimension mismatch");
        const std::size_t by = b / bw, bx = b % bw;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                img.pixels[(by * n + r) * img.width + bx * n + c] =
                    quantize_pixel(v[r * n + c]);
    }
    return img;
}

}  // namespace vqforge
