#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>

#include "vqforge/ide.hpp"

using namespace vqforge;

namespace {

GrayImage random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
    GrayImage img{w, h, {}};
    img.pixels.resize(w * h);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> px(0, 255);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(px(rng));
    return img;
}

}  // namespace

TEST_CASE("init_population draws each codeword from its sorted-sum group") {
    GrayImage img = random_image(16, 4, 9);  // 16 blocks of 2x2
    TrainingSet ts = extract_blocks(img, 2);
    REQUIRE(ts.vectors.size() == 16);

    // independent oracle: re-sort block sums
    std::vector<double> sums;
    for (const auto& v : ts.vectors)
        sums.push_back(std::accumulate(v.begin(), v.end(), 0.0));
    std::vector<double> sorted = sums;
    std::sort(sorted.begin(), sorted.end());

    const std::size_t nc = 4, group = 4;
    auto rng = substream(1, 2, 3);
    auto pop = init_population(ts, nc, 6, rng);
    REQUIRE(pop.size() == 6);
    for (const auto& cand : pop) {
        REQUIRE(cand.genome.size() == nc * ts.dim);
        for (std::size_t j = 0; j < nc; ++j) {
            double s = 0;
            for (std::size_t k = 0; k < ts.dim; ++k)
                s += cand.genome[j * ts.dim + k];
            // codeword j must be a block whose sum lies within group j's range
            CHECK(s >= sorted[j * group] - 1e-9);
            CHECK(s <= sorted[j * group + group - 1] + 1e-9);
        }
    }
}

TEST_CASE("init_population degenerate and error cases") {
    GrayImage img = random_image(8, 2, 10);
    TrainingSet ts = extract_blocks(img, 2);  // 4 blocks
    auto rng = substream(0, 0, 0);

    SECTION("N_c == N_b reproduces the sorted training set") {
        auto pop = init_population(ts, 4, 3, rng);
        std::vector<double> sums;
        for (const auto& v : ts.vectors)
            sums.push_back(std::accumulate(v.begin(), v.end(), 0.0));
        std::sort(sums.begin(), sums.end());
        for (const auto& cand : pop)
            for (std::size_t j = 0; j < 4; ++j) {
                double s = 0;
                for (std::size_t k = 0; k < ts.dim; ++k)
                    s += cand.genome[j * ts.dim + k];
                CHECK(s == Catch::Approx(sums[j]));
            }
    }
    SECTION("N_c > N_b is rejected") {
        CHECK_THROWS_AS(init_population(ts, 5, 3, rng), QuantizerError);
    }
}

TEST_CASE("mutate implements current-to-best/1") {
    SECTION("hand evaluation") {
        auto v = mutate({10}, {20}, {4}, {2}, 0.5);
        CHECK(v[0] == Catch::Approx(16.0));
    }
    SECTION("F = 0 is the identity") {
        std::vector<double> x{1, 2, 3};
        CHECK(mutate(x, {9, 9, 9}, {5, 5, 5}, {1, 1, 1}, 0.0) == x);
    }
    SECTION("degenerate differences leave the target unchanged") {
        std::vector<double> x{4, 5};
        CHECK(mutate(x, x, {7, 8}, {7, 8}, 123.0) == x);
    }
    SECTION("length mismatch") {
        CHECK_THROWS_AS(mutate({1}, {1, 2}, {1}, {1}, 1.0), QuantizerError);
    }
}

TEST_CASE("draw_f is f_scale times a standard normal") {
    SECTION("matches the raw normal draw scaled") {
        auto a = substream(1, 1, 1);
        auto b = substream(1, 1, 1);
        std::normal_distribution<double> randn(0.0, 1.0);
        CHECK(draw_f(a, 3.0) == Catch::Approx(3.0 * randn(b)));
    }
    SECTION("f_scale = 0 always yields 0") {
        auto rng = substream(2, 2, 2);
        for (int i = 0; i < 10; ++i) CHECK(draw_f(rng, 0.0) == 0.0);
    }
    SECTION("sample moments over 1e5 draws") {
        auto rng = substream(3, 3, 3);
        const int n = 100000;
        double sum = 0, sq = 0;
        for (int i = 0; i < n; ++i) {
            double f = draw_f(rng, 3.0);
            sum += f;
            sq += f * f;
        }
        double mean = sum / n;
        double sd = std::sqrt(sq / n - mean * mean);
        CHECK(std::abs(mean) < 0.05);
        CHECK(std::abs(sd - 3.0) < 0.05);
    }
}

TEST_CASE("crossover binomial mixing") {
    std::vector<double> target(100, 0.0), mutant(100, 1.0);
    SECTION("CR = 1 copies the mutant") {
        auto rng = substream(4, 4, 4);
        CHECK(crossover(target, mutant, 1.0, rng) == mutant);
    }
    SECTION("CR = 0 forces exactly one mutant component") {
        auto rng = substream(5, 5, 5);
        auto trial = crossover(target, mutant, 0.0, rng);
        CHECK(std::accumulate(trial.begin(), trial.end(), 0.0) == 1.0);
    }
    SECTION("CR = 0.5 mutant fraction over 1e4 components") {
        std::vector<double> t(10000, 0.0), m(10000, 1.0);
        auto rng = substream(6, 6, 6);
        auto trial = crossover(t, m, 0.5, rng);
        double frac = std::accumulate(trial.begin(), trial.end(), 0.0) / 10000.0;
        CHECK(std::abs(frac - 0.5) < 0.03);
    }
}

TEST_CASE("repair_bounds clamps or regenerates out-of-range components") {
    SECTION("clamp branch hits the violated bound") {
        std::vector<double> g{300.0, -5.0, 100.0};
        auto rng = substream(7, 7, 7);
        repair_bounds(g, 0.0, 255.0, 1.0, rng);  // always clamp
        CHECK(g == std::vector<double>{255.0, 0.0, 100.0});
    }
    SECTION("regenerate branch is uniform on [0,255]") {
        auto rng = substream(8, 8, 8);
        double sum = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            std::vector<double> g{300.0};
            repair_bounds(g, 0.0, 255.0, 0.0, rng);  // always regenerate
            CHECK(g[0] >= 0.0);
            CHECK(g[0] <= 255.0);
            sum += g[0];
        }
        CHECK(std::abs(sum / n - 127.5) < 3.0);
    }
}

TEST_CASE("evaluate_fitness matches an independent pipeline") {
    GrayImage img = random_image(8, 8, 21);
    TrainingSet ts = extract_blocks(img, 4);  // 4 blocks, dim 16

    SECTION("covering codebook is lossless") {
        std::vector<double> genome;
        for (const auto& v : ts.vectors)
            genome.insert(genome.end(), v.begin(), v.end());
        CHECK(evaluate_fitness(genome, ts, img) ==
              std::numeric_limits<double>::infinity());
    }
    SECTION("uniform image, matching single codeword") {
        GrayImage flat{8, 8, std::vector<std::uint8_t>(64, 128)};
        TrainingSet fts = extract_blocks(flat, 4);
        std::vector<double> genome(16, 128.0);
        CHECK(evaluate_fitness(genome, fts, flat) ==
              std::numeric_limits<double>::infinity());
    }
    SECTION("N_c = 2 fitness equals a from-scratch encode/decode path") {
        std::vector<double> genome(32);
        std::mt19937_64 rng(33);
        std::uniform_real_distribution<double> val(0.0, 255.0);
        for (auto& x : genome) x = val(rng);
        const double fit = evaluate_fitness(genome, ts, img);

        // second, independent path: per-block nearest scan + manual paste
        GrayImage recon{8, 8, std::vector<std::uint8_t>(64, 0)};
        for (std::size_t b = 0; b < ts.vectors.size(); ++b) {
            double d0 = 0, d1 = 0;
            for (std::size_t k = 0; k < 16; ++k) {
                d0 += (ts.vectors[b][k] - genome[k]) * (ts.vectors[b][k] - genome[k]);
                d1 += (ts.vectors[b][k] - genome[16 + k]) *
                      (ts.vectors[b][k] - genome[16 + k]);
            }
            const std::size_t w = d0 <= d1 ? 0 : 1;
            const std::size_t bx = b % 2, by = b / 2;
            for (std::size_t r = 0; r < 4; ++r)
                for (std::size_t c = 0; c < 4; ++c) {
                    double v = genome[w * 16 + r * 4 + c];
                    double rounded = std::floor(v + 0.5);
                    rounded = std::min(255.0, std::max(0.0, rounded));
                    recon.pixels[(by * 4 + r) * 8 + bx * 4 + c] =
                        static_cast<std::uint8_t>(rounded);
                }
        }
        double err = 0;
        for (std::size_t i = 0; i < 64; ++i) {
            double d = double(img.pixels[i]) - double(recon.pixels[i]);
            err += d * d;
        }
        CHECK(fit == Catch::Approx(10.0 * std::log10(65025.0 / (err / 64.0)))
                         .epsilon(1e-12));
    }
}

TEST_CASE("ide_optimize contracts") {
    GrayImage img = random_image(16, 16, 77);
    IdeConfig cfg;
    cfg.population_size = 8;
    cfg.generations = 6;
    cfg.seed = 5;
    TrainingSet ts = extract_blocks(img, 4);

    SECTION("history best is non-decreasing and starts at generation 0") {
        IdeResult r = ide_optimize(ts, img, 4, cfg);
        REQUIRE(r.history.size() == cfg.generations + 1);
        for (std::size_t g = 1; g < r.history.size(); ++g) {
            CHECK(r.history[g].best_psnr >= r.history[g - 1].best_psnr);
            CHECK(r.history[g].mean_psnr >= r.history[g - 1].mean_psnr);
        }
        CHECK(*r.best.fitness == r.history.back().best_psnr);
        CHECK(*r.best.fitness >= r.history.front().best_psnr);
    }
    SECTION("best genome respects bounds") {
        IdeResult r = ide_optimize(ts, img, 4, cfg);
        for (double g : r.best.genome) {
            CHECK(g >= 0.0);
            CHECK(g <= 255.0);
        }
    }
    SECTION("identical seeds give bit-identical results at any thread count") {
        IdeResult a = ide_optimize(ts, img, 4, cfg);
        IdeConfig threaded = cfg;
        threaded.threads = 4;
        IdeResult b = ide_optimize(ts, img, 4, threaded);
        CHECK(a.best.genome == b.best.genome);
        REQUIRE(a.history.size() == b.history.size());
        for (std::size_t g = 0; g < a.history.size(); ++g) {
            CHECK(a.history[g].best_psnr == b.history[g].best_psnr);
            CHECK(a.history[g].mean_psnr == b.history[g].mean_psnr);
        }
    }
    SECTION("different seeds explore differently") {
        IdeConfig other = cfg;
        other.seed = 6;
        CHECK(ide_optimize(ts, img, 4, cfg).best.genome !=
              ide_optimize(ts, img, 4, other).best.genome);
    }
    SECTION("two-tone image: optimizer never falls below its own start") {
        GrayImage tone{16, 16, {}};
        tone.pixels.resize(256);
        for (std::size_t i = 0; i < 256; ++i)
            tone.pixels[i] = (i % 16 < 8) ? 30 : 220;
        TrainingSet tts = extract_blocks(tone, 4);
        for (std::uint64_t s = 0; s < 10; ++s) {
            IdeConfig c = cfg;
            c.seed = s;
            c.generations = 20;
            IdeResult r = ide_optimize(tts, tone, 2, c);
            CHECK(*r.best.fitness >= r.history.front().best_psnr);
        }
    }
    SECTION("population size below 4 is rejected") {
        IdeConfig bad = cfg;
        bad.population_size = 3;
        CHECK_THROWS_AS(ide_optimize(ts, img, 4, bad), QuantizerError);
    }
}
