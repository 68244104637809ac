// Improved Differential Evolution over flattened codebooks, maximizing the
// PSNR of the reconstructed image. DE/current-to-best/1 mutation with a
// normally distributed weighting factor, binomial crossover, and
// probabilistic boundary repair (clamp or regenerate).
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "vqforge/parallel.hpp"
#include "vqforge/quantizer.hpp"

namespace vqforge {

constexpr double kGenomeLo = 0.0;
constexpr double kGenomeHi = 255.0;

struct Candidate {
    std::vector<double> genome;  // flattened codebook, row-major by codeword
    std::optional<double> fitness;  // PSNR in dB
};

struct IdeConfig {
    std::size_t population_size = 20;
    std::size_t generations = 10;
    double crossover_rate = 0.9;
    double f_scale = 3.0;
    double repair_clamp_probability = 0.5;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

struct GenerationStats {
    double best_psnr;
    double mean_psnr;
};

struct IdeResult {
    Candidate best;
    std::vector<GenerationStats> history;  // entry 0 is the initial population
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

// Deterministic substream keyed by (seed, stream, index); parallel
// evaluation order cannot change any draw.
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream,
                                 std::uint64_t index) {
    std::uint64_t s = detail::splitmix64(seed);
    s = detail::splitmix64(s ^ stream);
    s = detail::splitmix64(s ^ index);
    return std::mt19937_64(s);
}

inline double draw_f(std::mt19937_64& rng, double f_scale) {
    std::normal_distribution<double> randn(0.0, 1.0);
    return f_scale * randn(rng);
}

inline std::vector<double> mutate(const std::vector<double>& target,
                                  const std::vector<double>& best,
                                  const std::vector<double>& r1,
                                  const std::vector<double>& r2, double f) {
    const std::size_t len = target.size();
    if (best.size() != len || r1.size() != len || r2.size() != len)
        throw QuantizerError("mutate: genome length mismatch");
    std::vector<double> v(len);
    for (std::size_t k = 0; k < len; ++k)
        v[k] = target[k] + f * (best[k] - target[k]) + f * (r1[k] - r2[k]);
    return v;
}

inline std::vector<double> crossover(const std::vector<double>& target,
                                     const std::vector<double>& mutant,
                                     double cr, std::mt19937_64& rng) {
    const std::size_t len = target.size();
    if (mutant.size() != len) throw QuantizerError("crossover: genome length mismatch");
    if (cr < 0.0 || cr > 1.0) throw QuantizerError("crossover: CR out of [0,1]");
    std::uniform_int_distribution<std::size_t> pick(0, len - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t j_rand = pick(rng);
    std::vector<double> trial(len);
    for (std::size_t j = 0; j < len; ++j)
        trial[j] = (unit(rng) <= cr || j == j_rand) ? mutant[j] : target[j];
    return trial;
}

// Out-of-range components are clamped to the violated bound with
// probability p_clamp and otherwise regenerated uniformly in [lo, hi].
inline void repair_bounds(std::vector<double>& genome, double lo, double hi,
                          double p_clamp, std::mt19937_64& rng) {
    if (!(lo < hi)) throw QuantizerError("repair_bounds: invalid bounds");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> fresh(lo, hi);
    for (double& g : genome) {
        if (g >= lo && g <= hi) continue;
        if (unit(rng) < p_clamp)
            g = g < lo ? lo : hi;
        else
            g = fresh(rng);
    }
}

inline Codebook genome_to_codebook(const std::vector<double>& genome,
                                   std::size_t dim) {
    if (dim == 0 || genome.size() % dim != 0)
        throw QuantizerError("genome length is not a multiple of the dimension");
    Codebook cb;
    cb.dim = dim;
    cb.data = genome;
    return cb;
}

inline double evaluate_fitness(const std::vector<double>& genome,
                               const TrainingSet& ts, const GrayImage& original,
                               unsigned threads = 1) {
    const Codebook cb = genome_to_codebook(genome, ts.dim);
    const IndexMap im = encode(ts, cb, threads);
    const GrayImage recon = decode(im, cb);
    return psnr(mse(original, recon));
}

// Blocks sorted ascending by component sum, split into N_c contiguous
// groups of floor(N_b/N_c) (last group absorbs the remainder); each
// candidate draws its j-th codeword uniformly from group j.
inline std::vector<Candidate> init_population(const TrainingSet& ts,
                                              std::size_t nc, std::size_t np,
                                              std::mt19937_64& rng) {
    const std::size_t nb = ts.vectors.size();
    if (nb == 0) throw QuantizerError("init_population: empty training set");
    if (nc > nb) throw QuantizerError("init_population: codebook larger than block count");

    std::vector<std::size_t> order(nb);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> sums(nb);
    for (std::size_t i = 0; i < nb; ++i)
        sums[i] = std::accumulate(ts.vectors[i].begin(), ts.vectors[i].end(), 0.0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sums[a] < sums[b]; });

    const std::size_t group = nb / nc;
    std::vector<Candidate> pop(np);
    for (auto& cand : pop) {
        cand.genome.reserve(nc * ts.dim);
        for (std::size_t j = 0; j < nc; ++j) {
            const std::size_t lo = j * group;
            const std::size_t hi = (j + 1 == nc) ? nb : lo + group;
            std::uniform_int_distribution<std::size_t> pick(lo, hi - 1);
            const auto& block = ts.vectors[order[pick(rng)]];
            cand.genome.insert(cand.genome.end(), block.begin(), block.end());
        }
    }
    return pop;
}

namespace detail {

inline std::size_t best_index(const std::vector<Candidate>& pop) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (*pop[i].fitness > *pop[best].fitness) best = i;
    return best;
}

inline GenerationStats stats_of(const std::vector<Candidate>& pop) {
    double best = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& c : pop) {
        best = std::max(best, *c.fitness);
        sum += *c.fitness;
    }
    return {best, sum / static_cast<double>(pop.size())};
}

}  // namespace detail

inline IdeResult ide_optimize(const TrainingSet& ts, const GrayImage& original,
                              std::size_t nc, const IdeConfig& cfg) {
    if (cfg.population_size < 4)
        throw QuantizerError("ide_optimize: population size must be >= 4");
    if (cfg.generations < 1)
        throw QuantizerError("ide_optimize: generations must be >= 1");

    constexpr std::uint64_t kInitStream = 0x1de0u;
    auto init_rng = substream(cfg.seed, kInitStream, 0);
    std::vector<Candidate> pop =
        init_population(ts, nc, cfg.population_size, init_rng);
    parallel_for(pop.size(), cfg.threads, [&](std::size_t i) {
        pop[i].fitness = evaluate_fitness(pop[i].genome, ts, original);
    });

    IdeResult out;
    out.history.push_back(detail::stats_of(pop));

    const std::size_t np = pop.size();
    for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
        // Synchronous DE: mutation reads the settled previous population.
        const std::vector<Candidate> prev = pop;
        const std::size_t best = detail::best_index(prev);
        parallel_for(np, cfg.threads, [&](std::size_t i) {
            auto rng = substream(cfg.seed, gen, i);
            std::uniform_int_distribution<std::size_t> pick(0, np - 1);
            std::size_t r1, r2;
            do r1 = pick(rng); while (r1 == i);
            do r2 = pick(rng); while (r2 == i || r2 == r1);
            const double f = draw_f(rng, cfg.f_scale);
            std::vector<double> trial = crossover(
                prev[i].genome,
                mutate(prev[i].genome, prev[best].genome, prev[r1].genome,
                       prev[r2].genome, f),
                cfg.crossover_rate, rng);
            repair_bounds(trial, kGenomeLo, kGenomeHi,
                          cfg.repair_clamp_probability, rng);
            const double fit = evaluate_fitness(trial, ts, original);
            // Greedy one-to-one selection; ties go to the trial.
            if (fit >= *prev[i].fitness)
                pop[i] = Candidate{std::move(trial), fit};
        });
        out.history.push_back(detail::stats_of(pop));
    }
    out.best = pop[detail::best_index(pop)];
    return out;
}

}  // namespace vqforge
