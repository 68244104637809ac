// LBG (generalized Lloyd) codebook refinement: alternate nearest-neighbor
// partitioning and centroid updates until the distortion change is small.
#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "vqforge/quantizer.hpp"

namespace vqforge {

enum class EmptyCellPolicy { ReseedFarthest, Keep };

struct LbgConfig {
    double epsilon = 0.001;          // threshold on |D_{m-1} - D_m|
    std::size_t max_iterations = 100;
    EmptyCellPolicy empty_cell_policy = EmptyCellPolicy::ReseedFarthest;
    bool relative_change = false;    // compare |D_{m-1} - D_m| / D_{m-1} instead
    unsigned threads = 1;
};

struct LbgTrace {
    std::vector<double> distortions;  // D_m per iteration
    std::size_t iterations_run = 0;
    bool converged = false;
};

inline Codebook centroid_update(const TrainingSet& ts, const IndexMap& im,
                                const Codebook& cb,
                                EmptyCellPolicy policy = EmptyCellPolicy::ReseedFarthest) {
    if (ts.dim != cb.dim || ts.vectors.size() != im.indices.size())
        throw QuantizerError("centroid_update: inconsistent inputs");
    const std::size_t nc = cb.size();
    Codebook next(cb.dim, nc);
    std::vector<std::size_t> counts(nc, 0);
    for (std::size_t i = 0; i < ts.vectors.size(); ++i) {
        const std::uint32_t j = im.indices[i];
        double* acc = next.word(j);
        const double* x = ts.vectors[i].data();
        for (std::size_t k = 0; k < ts.dim; ++k) acc[k] += x[k];
        ++counts[j];
    }
    for (std::size_t j = 0; j < nc; ++j) {
        if (counts[j] > 0) {
            double* c = next.word(j);
            for (std::size_t k = 0; k < ts.dim; ++k)
                c[k] /= static_cast<double>(counts[j]);
        } else if (policy == EmptyCellPolicy::Keep) {
            std::copy(cb.word(j), cb.word(j) + cb.dim, next.word(j));
        } else {
            // Reseed with the training vector farthest from the old codeword.
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < ts.vectors.size(); ++i) {
                const double* x = ts.vectors[i].data();
                const double* c = cb.word(j);
                double d = 0.0;
                for (std::size_t k = 0; k < ts.dim; ++k) {
                    double dd = x[k] - c[k];
                    d += dd * dd;
                }
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            std::copy(ts.vectors[far].begin(), ts.vectors[far].end(), next.word(j));
        }
    }
    return next;
}

struct LbgResult {
    Codebook codebook;
    LbgTrace trace;
};

inline LbgResult lbg_refine(const TrainingSet& ts, const Codebook& initial,
                            const LbgConfig& cfg = {}) {
    if (ts.vectors.empty()) throw QuantizerError("lbg_refine: empty training set");
    if (ts.dim != initial.dim)
        throw QuantizerError("lbg_refine: dimension mismatch");
    if (cfg.epsilon <= 0.0 || cfg.max_iterations < 1)
        throw QuantizerError("lbg_refine: invalid config");

    LbgResult out;
    out.codebook = initial;
    // D_0 sentinel so the first comparison is between two computed values.
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t m = 1; m <= cfg.max_iterations; ++m) {
        IndexMap im = encode(ts, out.codebook, cfg.threads);
        out.codebook = centroid_update(ts, im, out.codebook, cfg.empty_cell_policy);
        // Distortion of the step's partition against the updated centroids.
        const double d = distortion(ts, out.codebook, im);
        out.trace.distortions.push_back(d);
        out.trace.iterations_run = m;
        const double delta =
            cfg.relative_change && prev > 0.0 &&
                    prev != std::numeric_limits<double>::infinity()
                ? (prev - d) / prev
                : prev - d;
        if (std::abs(delta) <= cfg.epsilon) {
            out.trace.converged = true;
            break;
        }
        prev = d;
    }
    return out;
}

}  // namespace vqforge
