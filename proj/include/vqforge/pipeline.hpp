// Composes IDE and LBG into the IDE-LBG trainer, a random-init LBG
// baseline, and the benchmark sweep over codebook sizes and seeded runs.
#pragma once

#include <chrono>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "vqforge/ide.hpp"
#include "vqforge/lbg.hpp"
#include "vqforge/quantizer.hpp"

namespace vqforge {

struct RunReport {
    std::string method;
    std::string image_id;
    std::size_t codebook_size = 0;
    double bpp = 0.0;
    std::uint64_t seed = 0;
    double ide_best_psnr = 0.0;  // PSNR of the initial codebook handed to LBG
    double final_psnr = 0.0;     // PSNR of full encode/decode vs the original
    std::size_t lbg_iterations = 0;
    double wall_time_s = 0.0;
};

struct TrainResult {
    Codebook codebook;
    RunReport report;
    LbgTrace lbg_trace;
};

namespace detail {

inline double report_psnr(const GrayImage& img, const TrainingSet& ts,
                          const Codebook& cb, unsigned threads) {
    return psnr(mse(img, decode(encode(ts, cb, threads), cb)));
}

class WallClock {
  public:
    double seconds() const {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_ =
        std::chrono::steady_clock::now();
};

}  // namespace detail

inline TrainResult train_ide_lbg(const GrayImage& img, std::size_t nc,
                                 const IdeConfig& ide_cfg,
                                 const LbgConfig& lbg_cfg,
                                 std::size_t block_side = 4,
                                 const std::string& image_id = "") {
    detail::WallClock clock;
    const TrainingSet ts = extract_blocks(img, block_side);
    IdeResult ide = ide_optimize(ts, img, nc, ide_cfg);
    LbgResult lbg = lbg_refine(ts, genome_to_codebook(ide.best.genome, ts.dim),
                               lbg_cfg);
    TrainResult out;
    out.codebook = std::move(lbg.codebook);
    out.lbg_trace = std::move(lbg.trace);
    out.report = RunReport{
        "ide-lbg",
        image_id,
        nc,
        bpp(nc, ts.dim),
        ide_cfg.seed,
        *ide.best.fitness,
        detail::report_psnr(img, ts, out.codebook, ide_cfg.threads),
        out.lbg_trace.iterations_run,
        clock.seconds()};
    return out;
}

inline TrainResult train_lbg_random(const GrayImage& img, std::size_t nc,
                                    const LbgConfig& lbg_cfg, std::uint64_t seed,
                                    std::size_t block_side = 4,
                                    const std::string& image_id = "") {
    detail::WallClock clock;
    const TrainingSet ts = extract_blocks(img, block_side);
    const std::size_t nb = ts.vectors.size();
    if (nc > nb) throw QuantizerError("train_lbg_random: codebook larger than block count");

    // Initial codebook: nc blocks sampled uniformly without replacement.
    constexpr std::uint64_t kRandomInitStream = 0x5eedu;
    auto rng = substream(seed, kRandomInitStream, 0);
    std::vector<std::size_t> order(nb);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < nc; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, nb - 1);
        std::swap(order[i], order[pick(rng)]);
    }
    Codebook initial(ts.dim, nc);
    for (std::size_t j = 0; j < nc; ++j)
        std::copy(ts.vectors[order[j]].begin(), ts.vectors[order[j]].end(),
                  initial.word(j));

    const double initial_psnr = detail::report_psnr(img, ts, initial, lbg_cfg.threads);
    LbgResult lbg = lbg_refine(ts, initial, lbg_cfg);
    TrainResult out;
    out.codebook = std::move(lbg.codebook);
    out.lbg_trace = std::move(lbg.trace);
    out.report = RunReport{
        "lbg-random",
        image_id,
        nc,
        bpp(nc, ts.dim),
        seed,
        initial_psnr,
        detail::report_psnr(img, ts, out.codebook, lbg_cfg.threads),
        out.lbg_trace.iterations_run,
        clock.seconds()};
    return out;
}

struct SweepSummary {
    std::string method;
    std::string image_id;
    std::size_t codebook_size = 0;
    double bpp = 0.0;
    double mean_psnr = 0.0;
    double std_psnr = 0.0;
    std::size_t runs = 0;
};

struct SweepResult {
    std::vector<RunReport> runs;          // (method, nc, run) order
    std::vector<SweepSummary> summaries;  // (method, nc) order
    std::vector<LbgTrace> traces;         // parallel to runs
};

inline SweepResult benchmark_sweep(const GrayImage& img,
                                   const std::string& image_id,
                                   const std::vector<std::size_t>& sizes,
                                   std::size_t runs, std::uint64_t base_seed,
                                   const std::vector<std::string>& methods,
                                   const IdeConfig& ide_base,
                                   const LbgConfig& lbg_cfg,
                                   std::size_t block_side = 4) {
    if (sizes.empty() || runs < 1)
        throw QuantizerError("benchmark_sweep: need sizes and runs >= 1");
    SweepResult out;
    for (const auto& method : methods) {
        for (std::size_t nc : sizes) {
            std::vector<double> psnrs;
            for (std::size_t r = 0; r < runs; ++r) {
                const std::uint64_t seed = base_seed + r;
                TrainResult tr;
                if (method == "ide-lbg") {
                    IdeConfig cfg = ide_base;
                    cfg.seed = seed;
                    tr = train_ide_lbg(img, nc, cfg, lbg_cfg, block_side, image_id);
                } else if (method == "lbg-random") {
                    tr = train_lbg_random(img, nc, lbg_cfg, seed, block_side, image_id);
                } else {
                    throw QuantizerError("unknown method: " + method);
                }
                psnrs.push_back(tr.report.final_psnr);
                out.runs.push_back(std::move(tr.report));
                out.traces.push_back(std::move(tr.lbg_trace));
            }
            const double mean =
                std::accumulate(psnrs.begin(), psnrs.end(), 0.0) /
                static_cast<double>(psnrs.size());
            double var = 0.0;
            for (double p : psnrs) var += (p - mean) * (p - mean);
            const double sd =
                psnrs.size() > 1
                    ? std::sqrt(var / static_cast<double>(psnrs.size() - 1))
                    : 0.0;
            out.summaries.push_back(SweepSummary{
                method, image_id, nc, bpp(nc, block_side * block_side), mean,
                sd, runs});
        }
    }
    return out;
}

// ---- CSV output

namespace detail {

inline std::string fmt_double(double v) {
    if (v == std::numeric_limits<double>::infinity()) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline constexpr const char* kRunCsvHeader =
    "method,image,nc,bpp,seed,ide_best_psnr,final_psnr,lbg_iterations,wall_time_s";
inline constexpr const char* kSummaryCsvHeader =
    "method,image,nc,bpp,mean_psnr,std_psnr,runs";

inline void write_run_row(std::ostream& os, const RunReport& r) {
    os << r.method << ',' << r.image_id << ',' << r.codebook_size << ','
       << detail::fmt_double(r.bpp) << ',' << r.seed << ','
       << detail::fmt_double(r.ide_best_psnr) << ','
       << detail::fmt_double(r.final_psnr) << ',' << r.lbg_iterations << ','
       << detail::fmt_double(r.wall_time_s) << '\n';
}

inline void write_summary_row(std::ostream& os, const SweepSummary& s) {
    os << s.method << ',' << s.image_id << ',' << s.codebook_size << ','
       << detail::fmt_double(s.bpp) << ',' << detail::fmt_double(s.mean_psnr)
       << ',' << detail::fmt_double(s.std_psnr) << ',' << s.runs << '\n';
}

}  // namespace vqforge
