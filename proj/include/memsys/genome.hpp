#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "memsys/catalog.hpp"
#include "memsys/core.hpp"

namespace memsys {

using Genome = std::vector<double>;

// Per-memory slice of the flat genome. Gene 0 selects a compiler from the
// eligible list; genes 1..width-1 hold parameter values in the declared
// parameter order of whichever compiler is selected. Slots beyond the
// selected compiler's parameter count are carried but ignored.
struct MemoryBlock {
    std::size_t offset = 0;
    std::size_t width = 0;
    std::vector<std::size_t> eligible;  // catalog compiler indices, catalog order
};

struct GenomeLayout {
    std::vector<MemoryBlock> blocks;  // SystemSpec order
    std::size_t width = 0;
};

inline GenomeLayout build_layout(const Catalog& catalog, const SystemSpec& sys) {
    GenomeLayout layout;
    for (const auto& mem : sys.memories) {
        MemoryBlock block;
        block.offset = layout.width;
        block.eligible = eligible_compilers(catalog, mem);
        std::size_t max_params = 0;
        for (std::size_t ci : block.eligible)
            max_params = std::max(max_params, catalog.compilers[ci].params.size());
        block.width = 1 + max_params;
        layout.blocks.push_back(std::move(block));
        layout.width += layout.blocks.back().width;
    }
    return layout;
}

// Number of discrete options gene `g` can decode to: the eligible-compiler
// count for gene 0, otherwise the largest code count any eligible compiler
// declares at that parameter position (1 for slots no compiler uses).
inline std::size_t gene_cardinality(const Catalog& catalog, const MemoryBlock& block,
                                    std::size_t gene_in_block) {
    if (gene_in_block == 0) return block.eligible.size();
    std::size_t k = 1;
    for (std::size_t ci : block.eligible) {
        const auto& params = catalog.compilers[ci].params;
        const std::size_t pi = gene_in_block - 1;
        if (pi < params.size())
            k = std::max(k, static_cast<std::size_t>(params[pi].code_count()));
    }
    return k;
}

// Initial population: every gene uniform over [-0.5, K-0.5) where K is the
// gene's cardinality, so each discrete option starts equally likely under
// nearest-option decoding. Genes are drawn in flat index order, genome by
// genome.
inline std::vector<Genome> init_population(const Catalog& catalog, const GenomeLayout& layout,
                                           std::size_t pop_size, Rng& rng) {
    if (pop_size < 4)
        throw std::invalid_argument("init_population: population size must be >= 4");
    std::vector<Genome> pop(pop_size, Genome(layout.width, 0.0));
    for (auto& genome : pop) {
        for (const auto& block : layout.blocks) {
            for (std::size_t g = 0; g < block.width; ++g) {
                const double k = static_cast<double>(gene_cardinality(catalog, block, g));
                genome[block.offset + g] = rng.uniform(-0.5, k - 0.5);
            }
        }
    }
    return pop;
}

namespace detail {

// Nearest value in `options` (ascending) to x; ties resolve to the smaller.
inline int snap_to_nearest(double x, const std::vector<int>& options) {
    int best = options.front();
    double best_d = std::abs(x - static_cast<double>(best));
    for (std::size_t i = 1; i < options.size(); ++i) {
        const double d = std::abs(x - static_cast<double>(options[i]));
        if (d < best_d) {
            best = options[i];
            best_d = d;
        }
    }
    return best;
}

}  // namespace detail

// Decode a real genome into a fully feasible parameterization:
//   1. snap gene 0 to the nearest eligible-list position (tie: lower index),
//   2. snap each free parameter gene to its nearest feasible code
//      (tie: lower code),
//   3. snap each combo group jointly to the allowed tuple with the smallest
//      Euclidean distance (tie: lexicographically smallest tuple).
// The genome itself is never modified.
inline Parameterization repair(const Genome& genome, const Catalog& catalog,
                               const SystemSpec& sys, const GenomeLayout& layout) {
    if (genome.size() != layout.width)
        throw std::invalid_argument("repair: genome has " + std::to_string(genome.size()) +
                                    " genes, layout expects " + std::to_string(layout.width));
    for (double g : genome)
        if (!std::isfinite(g)) throw std::invalid_argument("repair: non-finite gene value");

    Parameterization out;
    for (std::size_t mi = 0; mi < sys.memories.size(); ++mi) {
        const MemoryRequirement& mem = sys.memories[mi];
        const MemoryBlock& block = layout.blocks[mi];

        const double g0 = genome[block.offset];
        std::size_t best_pos = 0;
        double best_d = std::abs(g0 - 0.0);
        for (std::size_t j = 1; j < block.eligible.size(); ++j) {
            const double d = std::abs(g0 - static_cast<double>(j));
            if (d < best_d) {
                best_pos = j;
                best_d = d;
            }
        }
        const CompilerSpec& comp = catalog.compilers[block.eligible[best_pos]];

        MemoryParameterization mp;
        mp.memory_id = mem.id;
        mp.compiler = comp.name;

        std::set<int> governed;
        for (const ComboRule* rule : applicable_combo_rules(comp, mem)) {
            std::vector<int> positions;
            for (const auto& pname : rule->params) positions.push_back(comp.param_index(pname));
            const auto tuples = feasible_combinations(comp, mem, *rule);
            std::size_t best_t = 0;
            double best_sq = 0.0;
            for (std::size_t ti = 0; ti < tuples.size(); ++ti) {
                double sq = 0.0;
                for (std::size_t k = 0; k < positions.size(); ++k) {
                    const double gene =
                        genome[block.offset + 1 + static_cast<std::size_t>(positions[k])];
                    const double d = gene - static_cast<double>(tuples[ti][k]);
                    sq += d * d;
                }
                if (ti == 0 || sq < best_sq) {
                    best_t = ti;
                    best_sq = sq;
                }
            }
            for (std::size_t k = 0; k < positions.size(); ++k) {
                mp.codes[rule->params[k]] = tuples[best_t][k];
                governed.insert(positions[k]);
            }
        }
        for (std::size_t pi = 0; pi < comp.params.size(); ++pi) {
            if (governed.count(static_cast<int>(pi))) continue;
            const double gene = genome[block.offset + 1 + pi];
            mp.codes[comp.params[pi].name] =
                detail::snap_to_nearest(gene, feasible_codes(comp, mem, comp.params[pi].name));
        }
        out.push_back(std::move(mp));
    }
    return out;
}

// Checks a parameterization is structurally complete and feasible for the
// given catalog and system. Throws ValidationError describing the first
// violation.
inline void validate_parameterization(const Parameterization& params, const Catalog& catalog,
                                      const SystemSpec& sys) {
    if (params.size() != sys.memories.size())
        throw ValidationError("parameterization covers " + std::to_string(params.size()) +
                              " memories, system has " + std::to_string(sys.memories.size()));
    for (std::size_t mi = 0; mi < params.size(); ++mi) {
        const MemoryParameterization& mp = params[mi];
        const MemoryRequirement& mem = sys.memories[mi];
        const std::string loc = "parameterization[" + std::to_string(mi) + "]";
        if (mp.memory_id != mem.id)
            throw ValidationError(loc + ": memory id '" + mp.memory_id + "' does not match '" +
                                  mem.id + "'");
        const int ci = catalog.compiler_index(mp.compiler);
        if (ci < 0) throw ValidationError(loc + ": unknown compiler '" + mp.compiler + "'");
        const auto eligible = eligible_compilers(catalog, mem);
        if (std::find(eligible.begin(), eligible.end(), static_cast<std::size_t>(ci)) ==
            eligible.end())
            throw ValidationError(loc + ": compiler '" + mp.compiler + "' cannot build memory '" +
                                  mem.id + "'");
        const CompilerSpec& comp = catalog.compilers[static_cast<std::size_t>(ci)];
        if (mp.codes.size() != comp.params.size())
            throw ValidationError(loc + ": " + std::to_string(mp.codes.size()) +
                                  " codes for a compiler with " +
                                  std::to_string(comp.params.size()) + " parameters");
        for (const auto& p : comp.params)
            if (!mp.codes.count(p.name))
                throw ValidationError(loc + ": missing code for parameter '" + p.name + "'");

        std::set<std::string> checked;
        for (const ComboRule* rule : applicable_combo_rules(comp, mem)) {
            std::vector<int> tuple;
            for (const auto& pname : rule->params) {
                tuple.push_back(mp.codes.at(pname));
                checked.insert(pname);
            }
            const auto tuples = feasible_combinations(comp, mem, *rule);
            if (std::find(tuples.begin(), tuples.end(), tuple) == tuples.end())
                throw ValidationError(loc + ": combination is not allowed for group starting at '" +
                                      rule->params.front() + "'");
        }
        for (const auto& p : comp.params) {
            if (checked.count(p.name)) continue;
            const auto codes = feasible_codes(comp, mem, p.name);
            if (std::find(codes.begin(), codes.end(), mp.codes.at(p.name)) == codes.end())
                throw ValidationError(loc + ": code " + std::to_string(mp.codes.at(p.name)) +
                                      " is not feasible for parameter '" + p.name + "'");
        }
    }
}

// Exact genome for a feasible parameterization: gene 0 at the compiler's
// eligible-list position, parameter genes at their codes, unused slots 0.
// repair() of the result reproduces `params`.
inline Genome encode_parameterization(const Parameterization& params, const Catalog& catalog,
                                      const SystemSpec& sys, const GenomeLayout& layout) {
    validate_parameterization(params, catalog, sys);
    Genome genome(layout.width, 0.0);
    for (std::size_t mi = 0; mi < params.size(); ++mi) {
        const MemoryBlock& block = layout.blocks[mi];
        const std::size_t ci =
            static_cast<std::size_t>(catalog.compiler_index(params[mi].compiler));
        const auto pos = std::find(block.eligible.begin(), block.eligible.end(), ci);
        genome[block.offset] =
            static_cast<double>(std::distance(block.eligible.begin(), pos));
        const CompilerSpec& comp = catalog.compilers[ci];
        for (std::size_t pi = 0; pi < comp.params.size(); ++pi)
            genome[block.offset + 1 + pi] =
                static_cast<double>(params[mi].codes.at(comp.params[pi].name));
    }
    return genome;
}

}  // namespace memsys
