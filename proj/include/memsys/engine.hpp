#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "memsys/catalog.hpp"
#include "memsys/core.hpp"
#include "memsys/estimator.hpp"
#include "memsys/genome.hpp"
#include "memsys/pareto.hpp"

namespace memsys {

struct DeConfig {
    std::size_t pop_size = 20;
    std::size_t generations = 50;
    double f = 0.8;
    double cr = 0.9;
    std::uint64_t seed = 1;
};

inline void validate_config(const DeConfig& cfg) {
    if (cfg.pop_size < 4) throw ValidationError("population size must be >= 4");
    if (cfg.generations < 1) throw ValidationError("generation count must be >= 1");
    if (!(cfg.f > 0.0)) throw ValidationError("differential weight F must be > 0");
    if (!(cfg.cr >= 0.0 && cfg.cr <= 1.0)) throw ValidationError("crossover rate CR must be in [0, 1]");
}

// Population with cached objective vectors, index-aligned.
struct DeState {
    std::vector<Genome> genomes;
    std::vector<ObjectiveVector> objectives;
};

// Optional per-generation capture for tests and debugging.
struct GenerationTrace {
    std::vector<Genome> offspring;
    std::vector<std::size_t> selected_pool_indices;  // 0..N-1 parents, N..2N-1 offspring
};

struct RunResult {
    std::vector<std::pair<Parameterization, ObjectiveVector>> final_front;
    std::vector<std::vector<ObjectiveVector>> history;  // entry 0: initial population,
                                                        // entry g: survivors of generation g
    std::size_t evaluations_used = 0;
    double wall_time_seconds = 0.0;
};

namespace detail {

// Distinct index below n, excluding the ascending-sorted values in `excl`,
// from a single rng draw.
inline std::size_t draw_excluding(Rng& rng, std::size_t n, const std::vector<std::size_t>& excl) {
    std::size_t v = static_cast<std::size_t>(rng.below(n - excl.size()));
    for (std::size_t e : excl)
        if (v >= e) ++v;
    return v;
}

}  // namespace detail

// DE/rand/1: mutant = x_r1 + F * (x_r2 - x_r3) with distinct r1, r2, r3, all
// different from the target index. Consumes exactly three rng draws.
inline Genome mutate_rand1(const std::vector<Genome>& population, std::size_t target_index,
                           double f, Rng& rng) {
    const std::size_t n = population.size();
    if (n < 4) throw std::invalid_argument("mutate_rand1: population size must be >= 4");

    std::vector<std::size_t> excl{target_index};
    const std::size_t r1 = detail::draw_excluding(rng, n, excl);
    excl.push_back(r1);
    std::sort(excl.begin(), excl.end());
    const std::size_t r2 = detail::draw_excluding(rng, n, excl);
    excl.push_back(r2);
    std::sort(excl.begin(), excl.end());
    const std::size_t r3 = detail::draw_excluding(rng, n, excl);

    const Genome& a = population[r1];
    const Genome& b = population[r2];
    const Genome& c = population[r3];
    Genome mutant(a.size());
    for (std::size_t g = 0; g < a.size(); ++g) mutant[g] = a[g] + f * (b[g] - c[g]);
    return mutant;
}

// Binomial crossover with a forced position j_rand so the offspring always
// takes at least one mutant gene. Consumes one index draw plus exactly L
// uniforms regardless of CR.
inline Genome crossover_bin(const Genome& parent, const Genome& mutant, double cr, Rng& rng) {
    if (parent.size() != mutant.size())
        throw std::invalid_argument("crossover_bin: genome length mismatch");
    const std::size_t len = parent.size();
    const std::size_t j_rand = static_cast<std::size_t>(rng.below(len));
    Genome off(len);
    for (std::size_t g = 0; g < len; ++g) {
        const double u = rng.uniform();
        off[g] = (u < cr || g == j_rand) ? mutant[g] : parent[g];
    }
    return off;
}

// One generation: N offspring via mutate+crossover (rng consumed parent by
// parent), repair + one batched evaluation of the offspring only, then
// NSGA-II selection over the 2N pool. Survivors keep their original
// real-valued genomes; parent objectives are carried from cache.
inline DeState evolve_generation(const DeState& state, const DeConfig& cfg, const Catalog& catalog,
                                 const SystemSpec& sys, const GenomeLayout& layout,
                                 EstimatorBackend& backend, Rng& rng,
                                 GenerationTrace* trace = nullptr) {
    const std::size_t n = state.genomes.size();
    std::vector<Genome> offspring(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Genome mutant = mutate_rand1(state.genomes, i, cfg.f, rng);
        offspring[i] = crossover_bin(state.genomes[i], mutant, cfg.cr, rng);
    }

    std::vector<Parameterization> repaired(n);
    parallel_for(n, [&](std::size_t i) { repaired[i] = repair(offspring[i], catalog, sys, layout); });
    const std::vector<ObjectiveVector> off_objs = batch_evaluate(catalog, sys, repaired, backend);

    std::vector<FrontMember> pool;
    pool.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) pool.push_back({state.objectives[i], i});
    for (std::size_t i = 0; i < n; ++i) pool.push_back({off_objs[i], n + i});
    const std::vector<std::size_t> selected = nsga2_select(pool, n);

    DeState next;
    next.genomes.reserve(n);
    next.objectives.reserve(n);
    for (std::size_t idx : selected) {
        if (idx < n) {
            next.genomes.push_back(state.genomes[idx]);
            next.objectives.push_back(state.objectives[idx]);
        } else {
            next.genomes.push_back(offspring[idx - n]);
            next.objectives.push_back(off_objs[idx - n]);
        }
    }
    if (trace != nullptr) {
        trace->offspring = std::move(offspring);
        trace->selected_pool_indices = selected;
    }
    return next;
}

// Full run: random initial population, G generations, then the non-dominated
// subset of the final population with repaired parameterizations attached.
// Deterministic in (cfg.seed, catalog, system) for deterministic backends,
// independent of worker count.
inline RunResult run_optimization(const Catalog& catalog, const SystemSpec& sys,
                                  const DeConfig& cfg, EstimatorBackend& backend) {
    validate_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const GenomeLayout layout = build_layout(catalog, sys);
    Rng rng(cfg.seed);

    DeState state;
    state.genomes = init_population(catalog, layout, cfg.pop_size, rng);
    {
        std::vector<Parameterization> repaired(cfg.pop_size);
        parallel_for(cfg.pop_size,
                     [&](std::size_t i) { repaired[i] = repair(state.genomes[i], catalog, sys, layout); });
        state.objectives = batch_evaluate(catalog, sys, repaired, backend);
    }

    RunResult result;
    result.history.push_back(state.objectives);
    for (std::size_t g = 0; g < cfg.generations; ++g) {
        state = evolve_generation(state, cfg, catalog, sys, layout, backend, rng);
        result.history.push_back(state.objectives);
    }

    for (std::size_t idx : skyline_dc(state.objectives))
        result.final_front.emplace_back(repair(state.genomes[idx], catalog, sys, layout),
                                        state.objectives[idx]);
    result.evaluations_used = cfg.pop_size * (cfg.generations + 1);
    result.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace memsys
