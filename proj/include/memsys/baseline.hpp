#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "memsys/catalog.hpp"
#include "memsys/core.hpp"
#include "memsys/estimator.hpp"
#include "memsys/pareto.hpp"

namespace memsys {

inline constexpr std::uint64_t kDefaultPerMemoryCap = 100000;
inline constexpr std::uint64_t kDefaultComboCap = 1000000000ULL;

struct Candidate {
    MemoryParameterization param;
    ObjectiveVector objective;
};

// Exhaustive feasible candidates per memory, in (eligible compiler, axis
// counter) enumeration order.
struct CandidateTable {
    std::vector<std::vector<Candidate>> per_memory;  // SystemSpec order
};

inline std::string u128_to_string(unsigned __int128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s;
}

inline unsigned __int128 count_combinations(const CandidateTable& table) {
    unsigned __int128 n = 1;
    for (const auto& cands : table.per_memory)
        n *= static_cast<unsigned __int128>(cands.size());
    return n;
}

// Every feasible candidate of every memory, evaluated in one batch per
// compiler (batches span memories). Candidate order per memory: eligible
// compilers in catalog order, then the axis counter of candidate_axes with
// the last axis advancing fastest.
inline CandidateTable enumerate_candidates(const Catalog& catalog, const SystemSpec& sys,
                                           EstimatorBackend& backend,
                                           std::uint64_t per_memory_cap = kDefaultPerMemoryCap) {
    CandidateTable table;
    table.per_memory.resize(sys.memories.size());
    for (std::size_t mi = 0; mi < sys.memories.size(); ++mi) {
        const MemoryRequirement& mem = sys.memories[mi];
        const std::uint64_t n = count_memory_candidates(catalog, mem);
        if (n > per_memory_cap)
            throw CapacityError("memory '" + mem.id + "' has " + std::to_string(n) +
                                " candidates, above the per-memory cap of " +
                                std::to_string(per_memory_cap) +
                                "; exhaustive enumeration is infeasible here, use the "
                                "evolutionary optimizer instead");
        for (std::size_t ci : eligible_compilers(catalog, mem)) {
            const CompilerSpec& comp = catalog.compilers[ci];
            const auto axes = candidate_axes(comp, mem);
            std::vector<std::size_t> idx(axes.size(), 0);
            bool done = false;
            while (!done) {
                MemoryParameterization mp;
                mp.memory_id = mem.id;
                mp.compiler = comp.name;
                for (std::size_t a = 0; a < axes.size(); ++a) {
                    const auto& opt = axes[a].options[idx[a]];
                    for (std::size_t k = 0; k < axes[a].param_indices.size(); ++k)
                        mp.codes[comp.params[static_cast<std::size_t>(axes[a].param_indices[k])]
                                     .name] = opt[k];
                }
                table.per_memory[mi].push_back({std::move(mp), {}});
                done = true;
                for (std::size_t a = axes.size(); a > 0;) {
                    --a;
                    if (++idx[a] < axes[a].options.size()) {
                        done = false;
                        break;
                    }
                    idx[a] = 0;
                }
            }
        }
    }

    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> groups(
        catalog.compilers.size());
    for (std::size_t mi = 0; mi < table.per_memory.size(); ++mi)
        for (std::size_t k = 0; k < table.per_memory[mi].size(); ++k)
            groups[static_cast<std::size_t>(
                       catalog.compiler_index(table.per_memory[mi][k].param.compiler))]
                .emplace_back(mi, k);
    for (std::size_t ci = 0; ci < groups.size(); ++ci) {
        if (groups[ci].empty()) continue;
        const CompilerSpec& comp = catalog.compilers[ci];
        BatchRequest req;
        req.batch_id = backend.allocate_batch_id();
        req.compiler = comp.name;
        req.objectives = catalog.objectives;
        req.items.reserve(groups[ci].size());
        for (const auto& [mi, k] : groups[ci]) {
            BatchItem item;
            item.words = sys.memories[mi].words;
            item.bits = sys.memories[mi].bits;
            item.codes = detail::ordered_codes(comp, table.per_memory[mi][k].param);
            req.items.push_back(std::move(item));
        }
        const auto results = backend.evaluate(req);
        if (results.size() != groups[ci].size())
            throw BackendError("batch " + std::to_string(req.batch_id) + ": backend returned " +
                               std::to_string(results.size()) + " results for " +
                               std::to_string(groups[ci].size()) + " items");
        for (std::size_t k = 0; k < groups[ci].size(); ++k)
            table.per_memory[groups[ci][k].first][groups[ci][k].second].objective = results[k];
    }
    return table;
}

// One system-level combination: per-memory candidate indices plus the summed
// objective vector.
struct FrontPoint {
    std::vector<std::size_t> candidate_indices;
    ObjectiveVector objective;
};

namespace detail {

// Cheap dominated-by-running-skyline probe. For two objectives it keeps the
// skyline sorted by objective 0 with a prefix minimum of objective 1, making
// the probe a pair of binary searches; otherwise it scans linearly. Dropping
// points the current skyline dominates never changes the final front
// (dominance is transitive), so this is purely an optimization.
class SkylineFilter {
public:
    void rebuild(const std::vector<FrontPoint>& sky, std::size_t arity) {
        arity_ = arity;
        if (arity_ == 2) {
            std::vector<std::pair<double, double>> pts;
            pts.reserve(sky.size());
            for (const auto& fp : sky) pts.emplace_back(fp.objective[0], fp.objective[1]);
            std::sort(pts.begin(), pts.end());
            sorted0_.resize(pts.size());
            prefix_min1_.resize(pts.size());
            double run = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < pts.size(); ++i) {
                sorted0_[i] = pts[i].first;
                run = std::min(run, pts[i].second);
                prefix_min1_[i] = run;
            }
        } else {
            generic_.clear();
            generic_.reserve(sky.size());
            for (const auto& fp : sky) generic_.push_back(fp.objective);
        }
    }

    bool dominated(const double* obj) const {
        if (arity_ == 2) {
            if (sorted0_.empty()) return false;
            const double x = obj[0], y = obj[1];
            // some s with s0 <= x and s1 < y, or s0 < x and s1 <= y
            const std::size_t le =
                static_cast<std::size_t>(std::upper_bound(sorted0_.begin(), sorted0_.end(), x) -
                                         sorted0_.begin());
            if (le > 0 && prefix_min1_[le - 1] < y) return true;
            const std::size_t lt =
                static_cast<std::size_t>(std::lower_bound(sorted0_.begin(), sorted0_.end(), x) -
                                         sorted0_.begin());
            return lt > 0 && prefix_min1_[lt - 1] <= y;
        }
        for (const auto& s : generic_) {
            bool strict = false, no_worse = true;
            for (std::size_t m = 0; m < arity_; ++m) {
                if (s[m] > obj[m]) {
                    no_worse = false;
                    break;
                }
                if (s[m] < obj[m]) strict = true;
            }
            if (no_worse && strict) return true;
        }
        return false;
    }

private:
    std::size_t arity_ = 0;
    std::vector<double> sorted0_;
    std::vector<double> prefix_min1_;
    std::vector<ObjectiveVector> generic_;
};

}  // namespace detail

// Global Pareto set over all candidate combinations, streamed in blocks of
// 2^16; memory use is bounded by the block plus the running skyline, never
// the full combination count. Combination order is a mixed-radix counter
// over per-memory candidate indices, last memory fastest; objective sums are
// formed left to right over memories so results are bit-identical to the
// naive per-combination sum. The returned front is in enumeration order.
inline std::vector<FrontPoint> exhaustive_front(const CandidateTable& table,
                                                std::uint64_t combo_cap = kDefaultComboCap) {
    if (table.per_memory.empty())
        throw std::invalid_argument("exhaustive_front: table covers no memories");
    for (const auto& cands : table.per_memory)
        if (cands.empty())
            throw std::invalid_argument("exhaustive_front: memory with no candidates");
    const unsigned __int128 total = count_combinations(table);
    if (total > static_cast<unsigned __int128>(combo_cap))
        throw CapacityError("system has " + u128_to_string(total) +
                            " candidate combinations, above the cap of " +
                            std::to_string(combo_cap));

    const std::size_t n_mem = table.per_memory.size();
    const std::size_t arity = table.per_memory[0][0].objective.size();

    std::vector<std::vector<double>> prefix(n_mem + 1, std::vector<double>(arity, 0.0));
    std::vector<std::size_t> digits(n_mem, 0);
    auto recompute_from = [&](std::size_t j) {
        for (std::size_t t = j; t < n_mem; ++t) {
            const ObjectiveVector& o = table.per_memory[t][digits[t]].objective;
            for (std::size_t m = 0; m < arity; ++m) prefix[t + 1][m] = prefix[t][m] + o[m];
        }
    };
    recompute_from(0);

    std::vector<FrontPoint> sky;
    detail::SkylineFilter filter;
    constexpr std::size_t kBlock = 1u << 16;
    std::vector<ObjectiveVector> block_objs;
    std::vector<std::vector<std::size_t>> block_digits;
    block_objs.reserve(kBlock);
    block_digits.reserve(kBlock);

    auto flush = [&]() {
        if (block_objs.empty()) return;
        const std::vector<std::size_t> keep = skyline_dc(block_objs);
        std::vector<ObjectiveVector> combined;
        combined.reserve(sky.size() + keep.size());
        for (const auto& fp : sky) combined.push_back(fp.objective);
        for (std::size_t k : keep) combined.push_back(block_objs[k]);
        const std::vector<std::size_t> keep2 = skyline_dc(combined);
        std::vector<FrontPoint> next;
        next.reserve(keep2.size());
        for (std::size_t k : keep2) {
            if (k < sky.size()) {
                next.push_back(std::move(sky[k]));
            } else {
                const std::size_t bi = keep[k - sky.size()];
                next.push_back({std::move(block_digits[bi]), std::move(block_objs[bi])});
            }
        }
        sky = std::move(next);
        block_objs.clear();
        block_digits.clear();
        filter.rebuild(sky, arity);
    };

    bool done = false;
    while (!done) {
        const double* obj = prefix[n_mem].data();
        if (!filter.dominated(obj)) {
            block_objs.emplace_back(obj, obj + arity);
            block_digits.push_back(digits);
            if (block_objs.size() >= kBlock) flush();
        }
        done = true;
        for (std::size_t a = n_mem; a > 0;) {
            --a;
            if (++digits[a] < table.per_memory[a].size()) {
                recompute_from(a);
                done = false;
                break;
            }
            digits[a] = 0;
        }
    }
    flush();
    return sky;
}

}  // namespace memsys
