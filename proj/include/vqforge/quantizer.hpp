// Codebook representation, nearest-neighbor assignment, VQ encode/decode,
// quality metrics, and the on-disk codebook / encoded-image formats.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vqforge/image.hpp"
#include "vqforge/parallel.hpp"

namespace vqforge {

class QuantizerError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// N_c codewords of dimension dim, stored flat row-major by codeword.
struct Codebook {
    std::size_t dim = 0;
    std::vector<double> data;  // size() == size()*dim

    Codebook() = default;
    Codebook(std::size_t dim_, std::size_t count)
        : dim(dim_), data(dim_ * count, 0.0) {}

    std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
    double* word(std::size_t j) { return data.data() + j * dim; }
    const double* word(std::size_t j) const { return data.data() + j * dim; }
};

// One codeword index per training vector, raster block order.
struct IndexMap {
    std::vector<std::uint32_t> indices;
    std::size_t codebook_size = 0;
    std::size_t source_width = 0;
    std::size_t source_height = 0;
    std::size_t block_side = 0;
};

struct NearestResult {
    std::size_t index;
    double dist2;
};

// argmin_j ||x - C_j||^2, ties broken by lowest index. The partial-sum
// early exit skips a codeword only once its running sum already reaches
// the incumbent, which cannot change the argmin or the tie-break.
inline NearestResult nearest_codeword(const double* x, std::size_t dim,
                                      const Codebook& cb) {
    if (dim != cb.dim) throw QuantizerError("vector/codebook dimension mismatch");
    const std::size_t nc = cb.size();
    if (nc == 0) throw QuantizerError("empty codebook");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nc; ++j) {
        const double* c = cb.word(j);
        double d = 0.0;
        std::size_t k = 0;
        for (; k + 4 <= dim; k += 4) {
            double d0 = x[k] - c[k];
            double d1 = x[k + 1] - c[k + 1];
            double d2 = x[k + 2] - c[k + 2];
            double d3 = x[k + 3] - c[k + 3];
            d += d0 * d0;
            d += d1 * d1;
            d += d2 * d2;
            d += d3 * d3;
            if (d >= best_d) break;
        }
        if (d >= best_d) continue;
        for (; k < dim; ++k) {
            double dd = x[k] - c[k];
            d += dd * dd;
        }
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return {best, best_d};
}

inline NearestResult nearest_codeword(const std::vector<double>& x,
                                      const Codebook& cb) {
    return nearest_codeword(x.data(), x.size(), cb);
}

inline IndexMap encode(const TrainingSet& ts, const Codebook& cb,
                       unsigned threads = 1) {
    if (ts.dim != cb.dim)
        throw QuantizerError("training set / codebook dimension mismatch");
    IndexMap im;
    im.codebook_size = cb.size();
    im.source_width = ts.source_width;
    im.source_height = ts.source_height;
    im.block_side = ts.block_side;
    im.indices.resize(ts.vectors.size());
    parallel_for(ts.vectors.size(), threads, [&](std::size_t i) {
        im.indices[i] = static_cast<std::uint32_t>(
            nearest_codeword(ts.vectors[i], cb).index);
    });
    return im;
}

inline GrayImage decode(const IndexMap& im, const Codebook& cb) {
    if (im.codebook_size != cb.size())
        throw QuantizerError("index map / codebook size mismatch");
    TrainingSet ts;
    ts.dim = cb.dim;
    ts.source_width = im.source_width;
    ts.source_height = im.source_height;
    ts.block_side = im.block_side;
    ts.vectors.reserve(im.indices.size());
    for (std::uint32_t idx : im.indices) {
        if (idx >= cb.size()) throw QuantizerError("codeword index out of range");
        ts.vectors.emplace_back(cb.word(idx), cb.word(idx) + cb.dim);
    }
    return assemble_blocks(ts);
}

// Distortion normalized by the codebook size N_c.
inline double distortion(const TrainingSet& ts, const Codebook& cb,
                         const IndexMap& im) {
    if (ts.dim != cb.dim || ts.vectors.size() != im.indices.size())
        throw QuantizerError("distortion: inconsistent inputs");
    double sum = 0.0;
    for (std::size_t i = 0; i < ts.vectors.size(); ++i) {
        const double* x = ts.vectors[i].data();
        const double* c = cb.word(im.indices[i]);
        for (std::size_t k = 0; k < ts.dim; ++k) {
            double d = x[k] - c[k];
            sum += d * d;
        }
    }
    return sum / static_cast<double>(cb.size());
}

// Diagnostic variant: mean squared distance per training vector.
inline double distortion_mean_per_vector(const TrainingSet& ts,
                                         const Codebook& cb,
                                         const IndexMap& im) {
    return distortion(ts, cb, im) * static_cast<double>(cb.size()) /
           static_cast<double>(ts.vectors.size());
}

inline double mse(const GrayImage& a, const GrayImage& b) {
    if (a.width != b.width || a.height != b.height)
        throw QuantizerError("mse: image dimensions differ");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
        sum += d * d;
    }
    return sum / static_cast<double>(a.pixels.size());
}

inline double psnr(double mse_value) {
    if (mse_value < 0.0) throw QuantizerError("psnr: negative MSE");
    if (mse_value == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse_value);
}

inline double bpp(std::size_t codebook_size, std::size_t block_pixels) {
    if (codebook_size < 1 || block_pixels < 1)
        throw QuantizerError("bpp: invalid arguments");
    return std::log2(static_cast<double>(codebook_size)) /
           static_cast<double>(block_pixels);
}

// ---- codebook text format: "VQCB <N_c> <dim>" then one codeword per line

inline void save_codebook(const Codebook& cb, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw QuantizerError("cannot write codebook file: " + path);
    out << "VQCB " << cb.size() << " " << cb.dim << "\n";
    char buf[32];
    for (std::size_t j = 0; j < cb.size(); ++j) {
        const double* c = cb.word(j);
        for (std::size_t k = 0; k < cb.dim; ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", c[k]);
            out << (k ? " " : "") << buf;
        }
        out << "\n";
    }
    if (!out) throw QuantizerError("write failed: " + path);
}

inline Codebook load_codebook(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw QuantizerError("cannot open codebook file: " + path);
    std::string magic;
    std::size_t nc = 0, dim = 0;
    in >> magic >> nc >> dim;
    if (!in || magic != "VQCB" || nc == 0 || dim == 0)
        throw QuantizerError("bad VQCB header: " + path);
    Codebook cb(dim, nc);
    for (double& v : cb.data)
        if (!(in >> v)) throw QuantizerError("truncated codebook file: " + path);
    return cb;
}

// ---- encoded-image binary format (VQIM)

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f64(std::ostream& out, double v) {
    std::uint64_t u;
    static_assert(sizeof u == sizeof v);
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

}  // namespace detail

struct EncodedImage {
    IndexMap map;
    Codebook codebook;
};

inline void save_encoded(const EncodedImage& enc, const std::string& path) {
    if (enc.map.codebook_size != enc.codebook.size())
        throw QuantizerError("encoded image: map/codebook size mismatch");
    if (enc.codebook.size() > 65536)
        throw QuantizerError("encoded image: codebook too large for u16 indices");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw QuantizerError("cannot write encoded file: " + path);
    out.write("VQIM", 4);
    detail::put_u32(out, static_cast<std::uint32_t>(enc.map.source_width));
    detail::put_u32(out, static_cast<std::uint32_t>(enc.map.source_height));
    detail::put_u32(out, static_cast<std::uint32_t>(enc.map.block_side));
    detail::put_u32(out, static_cast<std::uint32_t>(enc.codebook.size()));
    for (double v : enc.codebook.data) detail::put_f64(out, v);
    for (std::uint32_t idx : enc.map.indices) {
        unsigned char b[2] = {static_cast<unsigned char>(idx),
                              static_cast<unsigned char>(idx >> 8)};
        out.write(reinterpret_cast<const char*>(b), 2);
    }
    if (!out) throw QuantizerError("write failed: " + path);
}

inline EncodedImage load_encoded(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw QuantizerError("cannot open encoded file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "VQIM")
        throw QuantizerError("bad VQIM header: " + path);
    EncodedImage enc;
    enc.map.source_width = detail::get_u32(in);
    enc.map.source_height = detail::get_u32(in);
    enc.map.block_side = detail::get_u32(in);
    std::size_t nc = detail::get_u32(in);
    if (!in || enc.map.block_side == 0 || nc == 0 ||
        enc.map.source_width % enc.map.block_side != 0 ||
        enc.map.source_height % enc.map.block_side != 0)
        throw QuantizerError("bad VQIM header: " + path);
    const std::size_t dim = enc.map.block_side * enc.map.block_side;
    enc.codebook = Codebook(dim, nc);
    for (double& v : enc.codebook.data) v = detail::get_f64(in);
    enc.map.codebook_size = nc;
    const std::size_t blocks = (enc.map.source_width / enc.map.block_side) *
                               (enc.map.source_height / enc.map.block_side);
    enc.map.indices.resize(blocks);
    for (auto& idx : enc.map.indices) {
        unsigned char b[2];
        in.read(reinterpret_cast<char*>(b), 2);
        idx = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8);
        if (idx >= nc) throw QuantizerError("VQIM index out of range: " + path);
    }
    if (!in) throw QuantizerError("truncated VQIM file: " + path);
    return enc;
}

}  // namespace vqforge
