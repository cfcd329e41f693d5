#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "memsys/baseline.hpp"
#include "memsys/catalog.hpp"
#include "memsys/core.hpp"
#include "memsys/estimator.hpp"
#include "memsys/pareto.hpp"

namespace testutil {

using namespace memsys;

// Two single-parameter compilers, one per memory size, whose surrogate
// reproduces the fixed candidate values used throughout the tests:
//   64x8:  (1.0, 1.0), (1.9, 0.01), (0.1, 1.9)
//   128x8: (2.0, 2.0), (1.0, 2.5), (2.5, 1.5)
inline Catalog toy_catalog() {
    Catalog cat;
    cat.objectives = {"area", "leakage"};

    CompilerSpec m1;
    m1.name = "toy_m1";
    m1.kind = MemoryKind::kSram;
    m1.ports = 1;
    m1.words_range = {64, 64};
    m1.bits_range = {8, 8};
    m1.params = {{"profile", {"balanced", "leak_opt", "area_opt"}}};
    SurrogateObjective a1, l1;
    a1.base = {1.0, 0.0, 0.0, 0.0};
    a1.multipliers["profile"] = {1.0, 1.9, 0.1};
    l1.base = {1.0, 0.0, 0.0, 0.0};
    l1.multipliers["profile"] = {1.0, 0.01, 1.9};
    m1.surrogate = {a1, l1};

    CompilerSpec m2 = m1;
    m2.name = "toy_m2";
    m2.words_range = {128, 128};
    SurrogateObjective a2, l2;
    a2.base = {1.0, 0.0, 0.0, 0.0};
    a2.multipliers["profile"] = {2.0, 1.0, 2.5};
    l2.base = {1.0, 0.0, 0.0, 0.0};
    l2.multipliers["profile"] = {2.0, 2.5, 1.5};
    m2.surrogate = {a2, l2};

    cat.compilers = {m1, m2};
    validate_catalog(cat);
    return cat;
}

inline SystemSpec toy_system() {
    SystemSpec sys;
    sys.memories = {{"mem1", 64, 8, 1, MemoryKind::kSram},
                    {"mem2", 128, 8, 1, MemoryKind::kSram}};
    validate_system(sys);
    return sys;
}

// All 9 system sums of the toy, in exhaustive enumeration order (second
// memory fastest).
inline std::vector<ObjectiveVector> toy_all_sums() {
    const std::vector<ObjectiveVector> c1{{1.0, 1.0}, {1.9, 0.01}, {0.1, 1.9}};
    const std::vector<ObjectiveVector> c2{{2.0, 2.0}, {1.0, 2.5}, {2.5, 1.5}};
    std::vector<ObjectiveVector> sums;
    for (const auto& a : c1)
        for (const auto& b : c2) sums.push_back({a[0] + b[0], a[1] + b[1]});
    return sums;
}

// O(n^2) reference skyline.
inline std::vector<std::size_t> naive_front_indices(const std::vector<ObjectiveVector>& points) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < points.size() && !dominated; ++j)
            if (j != i && dominates(points[j], points[i])) dominated = true;
        if (!dominated) keep.push_back(i);
    }
    return keep;
}

// Reference non-dominated sorting by repeated peeling.
inline std::vector<std::vector<std::size_t>> naive_sorted_fronts(
    const std::vector<ObjectiveVector>& points) {
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<bool> taken(points.size(), false);
    std::size_t remaining = points.size();
    while (remaining > 0) {
        std::vector<std::size_t> front;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (taken[i]) continue;
            bool dominated = false;
            for (std::size_t j = 0; j < points.size() && !dominated; ++j)
                if (!taken[j] && j != i && dominates(points[j], points[i])) dominated = true;
            if (!dominated) front.push_back(i);
        }
        for (std::size_t i : front) taken[i] = true;
        remaining -= front.size();
        fronts.push_back(std::move(front));
    }
    return fronts;
}

// Materialize every combination (same counter order and left-to-right sums
// as the streaming path) and skyline it in one shot.
inline std::vector<FrontPoint> materialized_front(const CandidateTable& table) {
    const std::size_t n_mem = table.per_memory.size();
    std::vector<ObjectiveVector> all;
    std::vector<std::vector<std::size_t>> all_digits;
    std::vector<std::size_t> digits(n_mem, 0);
    const std::size_t arity = table.per_memory.at(0).at(0).objective.size();
    bool done = false;
    while (!done) {
        ObjectiveVector sum(arity, 0.0);
        for (std::size_t t = 0; t < n_mem; ++t) {
            const ObjectiveVector& o = table.per_memory[t][digits[t]].objective;
            for (std::size_t m = 0; m < arity; ++m) sum[m] = sum[m] + o[m];
        }
        all.push_back(std::move(sum));
        all_digits.push_back(digits);
        done = true;
        for (std::size_t a = n_mem; a > 0;) {
            --a;
            if (++digits[a] < table.per_memory[a].size()) {
                done = false;
                break;
            }
            digits[a] = 0;
        }
    }
    std::vector<FrontPoint> front;
    for (std::size_t k : skyline_dc(all)) front.push_back({all_digits[k], all[k]});
    return front;
}

// Records every batch passed through to an inner backend.
class SpyBackend : public EstimatorBackend {
public:
    struct Call {
        std::string compiler;
        std::size_t items = 0;
    };

    explicit SpyBackend(EstimatorBackend& inner) : inner_(inner) {}

    std::vector<ObjectiveVector> evaluate(const BatchRequest& request) override {
        calls.push_back({request.compiler, request.items.size()});
        total_items += request.items.size();
        return inner_.evaluate(request);
    }

    std::vector<Call> calls;
    std::size_t total_items = 0;

private:
    EstimatorBackend& inner_;
};

inline std::filesystem::path make_temp_dir(const std::string& tag) {
    std::string tmpl = (std::filesystem::temp_directory_path() / (tag + "_XXXXXX")).string();
    if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    return tmpl;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Synthetic-system parameters keeping brute-force combination counts small
// enough (< ~1e6) to materialize in tests.
inline std::uint64_t small_target_for(std::size_t n_memories) {
    switch (n_memories) {
        case 2: return 120;
        case 3: return 20;
        case 4: return 8;
        default: return 4;
    }
}

}  // namespace testutil
