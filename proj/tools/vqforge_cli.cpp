// vqforge: train VQ codebooks (IDE-LBG or random-init LBG), encode/decode
// images, report quality metrics, and run the benchmark sweep.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vqforge/image.hpp"
#include "vqforge/lbg.hpp"
#include "vqforge/pipeline.hpp"
#include "vqforge/quantizer.hpp"

namespace {

using namespace vqforge;

std::string image_id_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
    std::vector<std::size_t> sizes;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        sizes.push_back(std::stoull(tok));
    }
    return sizes;
}

std::vector<std::string> parse_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

struct CommonOpts {
    std::size_t block_side = 4;
    std::size_t np = 20;
    std::size_t generations = 10;
    double epsilon = 0.001;
    double cr = 0.9;
    double f_scale = 3.0;
    double clamp_prob = 0.5;
    std::uint64_t seed = 0;
    unsigned threads = default_threads();
};

void add_train_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--block-side", o.block_side, "Block side n (blocks are n x n)")
        ->capture_default_str();
    cmd->add_option("--np", o.np, "DE population size")->capture_default_str();
    cmd->add_option("--generations", o.generations, "DE generations")
        ->capture_default_str();
    cmd->add_option("--epsilon", o.epsilon, "LBG convergence threshold")
        ->capture_default_str();
    cmd->add_option("--cr", o.cr, "DE crossover rate")->capture_default_str();
    cmd->add_option("--f-scale", o.f_scale, "Scale on the normal draw for F")
        ->capture_default_str();
    cmd->add_option("--clamp-prob", o.clamp_prob,
                    "Probability of clamping (vs regenerating) out-of-range genes")
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "RNG seed")
        ->envname("VQFORGE_SEED")
        ->capture_default_str();
    cmd->add_option("--threads", o.threads, "Worker thread cap (does not affect results)")
        ->capture_default_str();
}

IdeConfig make_ide_cfg(const CommonOpts& o) {
    IdeConfig cfg;
    cfg.population_size = o.np;
    cfg.generations = o.generations;
    cfg.crossover_rate = o.cr;
    cfg.f_scale = o.f_scale;
    cfg.repair_clamp_probability = o.clamp_prob;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    return cfg;
}

LbgConfig make_lbg_cfg(const CommonOpts& o) {
    LbgConfig cfg;
    cfg.epsilon = o.epsilon;
    cfg.threads = o.threads;
    return cfg;
}

int run(int argc, char** argv) {
    CLI::App app{"vqforge: vector-quantization image compression toolkit"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "Train a codebook and write it to a file");
    std::string train_image, train_out = "codebook.txt", train_method = "ide-lbg";
    std::size_t train_nc = 256;
    CommonOpts train_opts;
    train->add_option("--image", train_image, "Input PGM image")->required();
    train->add_option("--nc", train_nc, "Codebook size N_c")->capture_default_str();
    train->add_option("--method", train_method, "ide-lbg or lbg-random")
        ->capture_default_str();
    train->add_option("--out", train_out, "Codebook output path")
        ->capture_default_str();
    add_train_flags(train, train_opts);

    // encode
    auto* encode_cmd = app.add_subcommand("encode", "Encode an image with a codebook");
    std::string enc_codebook, enc_image, enc_out = "image.vqim";
    encode_cmd->add_option("codebook", enc_codebook, "Codebook file (VQCB)")->required();
    encode_cmd->add_option("--image", enc_image, "Input PGM image")->required();
    encode_cmd->add_option("--out", enc_out, "Encoded output path (VQIM)")
        ->capture_default_str();
    std::size_t enc_block = 4;
    unsigned enc_threads = default_threads();
    encode_cmd->add_option("--block-side", enc_block, "Block side n")
        ->capture_default_str();
    encode_cmd->add_option("--threads", enc_threads, "Worker thread cap")
        ->capture_default_str();

    // decode
    auto* decode_cmd = app.add_subcommand("decode", "Decode a VQIM file to a PGM image");
    std::string dec_in, dec_out = "decoded.pgm";
    decode_cmd->add_option("encoded", dec_in, "Encoded file (VQIM)")->required();
    decode_cmd->add_option("--out", dec_out, "Decoded PGM path")->capture_default_str();

    // metrics
    auto* metrics_cmd =
        app.add_subcommand("metrics", "Print mse/psnr/bpp for two images");
    std::string met_a, met_b;
    std::size_t met_nc = 256, met_block = 4;
    metrics_cmd->add_option("original", met_a, "Original PGM image")->required();
    metrics_cmd->add_option("reconstructed", met_b, "Reconstructed PGM image")
        ->required();
    metrics_cmd->add_option("--nc", met_nc, "Codebook size used (for bpp)")
        ->capture_default_str();
    metrics_cmd->add_option("--block-side", met_block, "Block side n (for bpp)")
        ->capture_default_str();

    // benchmark
    auto* bench = app.add_subcommand(
        "benchmark", "Sweep codebook sizes x seeded runs and write CSV reports");
    std::string bench_images, bench_sizes = "8,16,32,64,128,256";
    std::string bench_methods = "ide-lbg,lbg-random", bench_report = "report";
    std::size_t bench_runs = 10;
    CommonOpts bench_opts;
    bench->add_option("--images", bench_images, "Comma-separated PGM paths")
        ->required();
    bench->add_option("--sizes", bench_sizes, "Comma-separated codebook sizes")
        ->capture_default_str();
    bench->add_option("--runs", bench_runs, "Seeded runs per (method, size)")
        ->capture_default_str();
    bench->add_option("--methods", bench_methods,
                      "Comma-separated subset of ide-lbg,lbg-random")
        ->capture_default_str();
    bench->add_option("--report", bench_report,
                      "Report base path; writes <base>.runs.csv and <base>.summary.csv")
        ->capture_default_str();
    add_train_flags(bench, bench_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (*train) {
        if (train_nc < 1) {
            std::cerr << "error: --nc must be >= 1\n" << train->help();
            return 2;
        }
        if (train_method != "ide-lbg" && train_method != "lbg-random") {
            std::cerr << "error: unknown --method " << train_method << "\n";
            return 2;
        }
        const GrayImage img = load_image(train_image);
        TrainResult tr;
        if (train_method == "ide-lbg")
            tr = train_ide_lbg(img, train_nc, make_ide_cfg(train_opts),
                               make_lbg_cfg(train_opts), train_opts.block_side,
                               image_id_of(train_image));
        else
            tr = train_lbg_random(img, train_nc, make_lbg_cfg(train_opts),
                                  train_opts.seed, train_opts.block_side,
                                  image_id_of(train_image));
        save_codebook(tr.codebook, train_out);
        write_run_row(std::cout, tr.report);
        return 0;
    }
    if (*encode_cmd) {
        const GrayImage img = load_image(enc_image);
        const Codebook cb = load_codebook(enc_codebook);
        const TrainingSet ts = extract_blocks(img, enc_block);
        save_encoded(EncodedImage{encode(ts, cb, enc_threads), cb}, enc_out);
        return 0;
    }
    if (*decode_cmd) {
        const EncodedImage enc = load_encoded(dec_in);
        save_image(decode(enc.map, enc.codebook), dec_out);
        return 0;
    }
    if (*metrics_cmd) {
        const GrayImage a = load_image(met_a);
        const GrayImage b = load_image(met_b);
        const double m = mse(a, b);
        std::cout << "mse=" << detail::fmt_double(m)
                  << " psnr=" << detail::fmt_double(psnr(m))
                  << " bpp=" << detail::fmt_double(bpp(met_nc, met_block * met_block))
                  << "\n";
        return 0;
    }
    if (*bench) {
        const auto paths = parse_list(bench_images);
        const auto sizes = parse_sizes(bench_sizes);
        const auto methods = parse_list(bench_methods);
        if (paths.empty() || sizes.empty() || methods.empty() || bench_runs < 1) {
            std::cerr << "error: benchmark needs images, sizes, methods, runs >= 1\n";
            return 2;
        }
        for (const auto& m : methods) {
            if (m != "ide-lbg" && m != "lbg-random") {
                std::cerr << "error: unknown method " << m << "\n";
                return 2;
            }
        }
        std::ofstream runs_csv(bench_report + ".runs.csv", std::ios::trunc);
        std::ofstream summary_csv(bench_report + ".summary.csv", std::ios::trunc);
        if (!runs_csv || !summary_csv) {
            std::cerr << "error: cannot write report files at " << bench_report << "\n";
            return 1;
        }
        runs_csv << kRunCsvHeader << '\n';
        summary_csv << kSummaryCsvHeader << '\n';
        for (const auto& path : paths) {
            const GrayImage img = load_image(path);
            SweepResult sweep = benchmark_sweep(
                img, image_id_of(path), sizes, bench_runs, bench_opts.seed,
                methods, make_ide_cfg(bench_opts), make_lbg_cfg(bench_opts),
                bench_opts.block_side);
            for (const auto& r : sweep.runs) write_run_row(runs_csv, r);
            for (const auto& s : sweep.summaries) write_summary_row(summary_csv, s);
        }
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
