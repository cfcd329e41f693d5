#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "memsys/core.hpp"

namespace memsys {

enum class MemoryKind { kSram, kRom, kRf };

inline const char* to_string(MemoryKind k) {
    switch (k) {
        case MemoryKind::kSram: return "SRAM";
        case MemoryKind::kRom: return "ROM";
        case MemoryKind::kRf: return "RF";
    }
    return "?";
}

inline MemoryKind kind_from_string(const std::string& s, const std::string& loc) {
    if (s == "SRAM") return MemoryKind::kSram;
    if (s == "ROM") return MemoryKind::kRom;
    if (s == "RF") return MemoryKind::kRf;
    throw ValidationError(loc + ": unknown memory kind '" + s + "' (expected SRAM, ROM or RF)");
}

struct MemoryRequirement {
    std::string id;
    std::int64_t words = 1;
    std::int64_t bits = 1;
    int ports = 1;
    MemoryKind kind = MemoryKind::kSram;
};

struct SystemSpec {
    std::vector<MemoryRequirement> memories;
};

// Codes are the positions 0..K-1 of the label list; labels are cosmetic.
struct ParameterSpec {
    std::string name;
    std::vector<std::string> labels;

    int code_count() const { return static_cast<int>(labels.size()); }
};

struct IntRange {
    std::int64_t lo = 0;
    std::int64_t hi = 0;

    bool contains(std::int64_t v) const { return lo <= v && v <= hi; }
};

// Inclusive (words, bits) window a rule applies to.
struct SizeRegion {
    IntRange words;
    IntRange bits;

    bool contains(std::int64_t w, std::int64_t b) const { return words.contains(w) && bits.contains(b); }
};

struct ChoiceRule {
    SizeRegion when;
    std::string param;
    std::vector<int> allowed;
};

struct ComboRule {
    SizeRegion when;
    std::vector<std::string> params;
    std::vector<std::vector<int>> allowed;
};

// objective(words, bits, codes) = (c0 + c1*words*bits + c2*words + c3*bits)
//                                 * prod over params of multiplier[param][code]
struct SurrogateObjective {
    std::array<double, 4> base{0.0, 0.0, 0.0, 0.0};
    std::map<std::string, std::vector<double>> multipliers;

    double base_value(std::int64_t words, std::int64_t bits) const {
        const double w = static_cast<double>(words), b = static_cast<double>(bits);
        return base[0] + base[1] * w * b + base[2] * w + base[3] * b;
    }
};

struct CompilerSpec {
    std::string name;
    MemoryKind kind = MemoryKind::kSram;
    int ports = 1;
    IntRange words_range;
    IntRange bits_range;
    std::vector<ParameterSpec> params;
    std::vector<ChoiceRule> choice_rules;
    std::vector<ComboRule> combo_rules;
    std::vector<SurrogateObjective> surrogate;  // aligned to Catalog::objectives

    int param_index(const std::string& name) const {
        for (std::size_t i = 0; i < params.size(); ++i)
            if (params[i].name == name) return static_cast<int>(i);
        return -1;
    }
};

struct Catalog {
    std::vector<std::string> objectives;
    std::vector<CompilerSpec> compilers;

    std::size_t objective_count() const { return objectives.size(); }

    int compiler_index(const std::string& name) const {
        for (std::size_t i = 0; i < compilers.size(); ++i)
            if (compilers[i].name == name) return static_cast<int>(i);
        return -1;
    }
};

// A fully discrete assignment for one memory.
struct MemoryParameterization {
    std::string memory_id;
    std::string compiler;
    std::map<std::string, int> codes;

    bool operator==(const MemoryParameterization& o) const {
        return memory_id == o.memory_id && compiler == o.compiler && codes == o.codes;
    }
};

// One assignment per memory, in SystemSpec order.
using Parameterization = std::vector<MemoryParameterization>;

// ---------------------------------------------------------------------------
// Rule applicability
// ---------------------------------------------------------------------------

inline std::vector<const ComboRule*> applicable_combo_rules(const CompilerSpec& comp,
                                                            const MemoryRequirement& mem) {
    std::vector<const ComboRule*> out;
    for (const auto& rule : comp.combo_rules)
        if (rule.when.contains(mem.words, mem.bits)) out.push_back(&rule);
    return out;
}

// The combo rule governing `param` at this memory's size, if any.
inline const ComboRule* combo_rule_for(const CompilerSpec& comp, const MemoryRequirement& mem,
                                       const std::string& param) {
    for (const auto& rule : comp.combo_rules) {
        if (!rule.when.contains(mem.words, mem.bits)) continue;
        if (std::find(rule.params.begin(), rule.params.end(), param) != rule.params.end())
            return &rule;
    }
    return nullptr;
}

inline const ChoiceRule* applicable_choice_rule(const CompilerSpec& comp,
                                                const MemoryRequirement& mem,
                                                const std::string& param) {
    for (const auto& rule : comp.choice_rules)
        if (rule.param == param && rule.when.contains(mem.words, mem.bits)) return &rule;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Feasibility queries
// ---------------------------------------------------------------------------

// Compilers able to build `mem`: matching kind, matching ports, words/bits in
// range. Returned as indices into catalog.compilers, in catalog order.
inline std::vector<std::size_t> eligible_compilers(const Catalog& catalog,
                                                   const MemoryRequirement& mem) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < catalog.compilers.size(); ++i) {
        const CompilerSpec& c = catalog.compilers[i];
        if (c.kind == mem.kind && c.ports == mem.ports && c.words_range.contains(mem.words) &&
            c.bits_range.contains(mem.bits))
            out.push_back(i);
    }
    if (out.empty())
        throw NoEligibleCompilerError("memory '" + mem.id + "' (" + to_string(mem.kind) + ", " +
                                      std::to_string(mem.ports) + " ports, " +
                                      std::to_string(mem.words) + "x" + std::to_string(mem.bits) +
                                      ") has no eligible compiler");
    return out;
}

// Codes a non-combo-governed parameter may take for this memory, ascending.
inline std::vector<int> feasible_codes(const CompilerSpec& comp, const MemoryRequirement& mem,
                                       const std::string& param) {
    const int pi = comp.param_index(param);
    if (pi < 0)
        throw std::logic_error("feasible_codes: compiler '" + comp.name + "' has no parameter '" +
                               param + "'");
    if (combo_rule_for(comp, mem, param) != nullptr)
        throw std::logic_error("feasible_codes: parameter '" + param +
                               "' is combinatorially constrained for this memory size");
    const ChoiceRule* rule = applicable_choice_rule(comp, mem, param);
    std::vector<int> codes;
    if (rule != nullptr) {
        codes = rule->allowed;
        std::sort(codes.begin(), codes.end());
        codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
    } else {
        codes.resize(static_cast<std::size_t>(comp.params[static_cast<std::size_t>(pi)].code_count()));
        for (std::size_t i = 0; i < codes.size(); ++i) codes[i] = static_cast<int>(i);
    }
    return codes;
}

// Allowed tuples of an applicable combo rule, lexicographically ascending.
inline std::vector<std::vector<int>> feasible_combinations(const CompilerSpec& comp,
                                                           const MemoryRequirement& mem,
                                                           const ComboRule& group) {
    (void)comp;
    if (!group.when.contains(mem.words, mem.bits))
        throw std::logic_error("feasible_combinations: rule does not apply to memory size " +
                               std::to_string(mem.words) + "x" + std::to_string(mem.bits));
    std::vector<std::vector<int>> tuples = group.allowed;
    std::sort(tuples.begin(), tuples.end());
    return tuples;
}

// ---------------------------------------------------------------------------
// Candidate axes and counting
// ---------------------------------------------------------------------------

// One independent axis of the per-memory design space: either a free
// parameter (one param index, single-code options) or a combo group (the
// group's param indices, tuple options). Axes are ordered by the first
// involved parameter position; options are sorted ascending.
struct CandidateAxis {
    std::vector<int> param_indices;
    std::vector<std::vector<int>> options;
};

inline std::vector<CandidateAxis> candidate_axes(const CompilerSpec& comp,
                                                 const MemoryRequirement& mem) {
    std::vector<CandidateAxis> axes;
    std::set<int> governed;
    for (const ComboRule* rule : applicable_combo_rules(comp, mem)) {
        CandidateAxis axis;
        for (const auto& name : rule->params) axis.param_indices.push_back(comp.param_index(name));
        axis.options = feasible_combinations(comp, mem, *rule);
        for (int pi : axis.param_indices) governed.insert(pi);
        axes.push_back(std::move(axis));
    }
    for (std::size_t pi = 0; pi < comp.params.size(); ++pi) {
        if (governed.count(static_cast<int>(pi))) continue;
        CandidateAxis axis;
        axis.param_indices.push_back(static_cast<int>(pi));
        for (int code : feasible_codes(comp, mem, comp.params[pi].name))
            axis.options.push_back({code});
        axes.push_back(std::move(axis));
    }
    std::sort(axes.begin(), axes.end(), [](const CandidateAxis& a, const CandidateAxis& b) {
        return *std::min_element(a.param_indices.begin(), a.param_indices.end()) <
               *std::min_element(b.param_indices.begin(), b.param_indices.end());
    });
    return axes;
}

inline constexpr std::uint64_t kCountSaturated = UINT64_MAX;

inline std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > kCountSaturated / b) return kCountSaturated;
    return a * b;
}

inline std::uint64_t count_compiler_candidates(const CompilerSpec& comp,
                                               const MemoryRequirement& mem) {
    std::uint64_t n = 1;
    for (const auto& axis : candidate_axes(comp, mem))
        n = saturating_mul(n, axis.options.size());
    return n;
}

inline std::uint64_t count_memory_candidates(const Catalog& catalog,
                                             const MemoryRequirement& mem) {
    std::uint64_t n = 0;
    for (std::size_t ci : eligible_compilers(catalog, mem)) {
        const std::uint64_t c = count_compiler_candidates(catalog.compilers[ci], mem);
        n = (n > kCountSaturated - c) ? kCountSaturated : n + c;
    }
    return n;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

inline std::string comp_loc(std::size_t i, const CompilerSpec& c) {
    return "compilers[" + std::to_string(i) + "] ('" + c.name + "')";
}

inline void validate_region(const SizeRegion& r, const std::string& loc) {
    if (r.words.lo > r.words.hi || r.bits.lo > r.bits.hi)
        throw ValidationError(loc + ": empty applies_when region");
}

// Representative (words, bits) points, one per cell of the grid induced by
// the compiler range and all rule region boundaries. Evaluating rules at
// these points covers every distinct combination of applicable rules.
inline void region_grid(const CompilerSpec& c, std::vector<std::int64_t>& ws,
                        std::vector<std::int64_t>& bs) {
    ws = {c.words_range.lo};
    bs = {c.bits_range.lo};
    auto add = [](std::vector<std::int64_t>& v, std::int64_t x, const IntRange& range) {
        if (x >= range.lo && x <= range.hi) v.push_back(x);
    };
    auto add_region = [&](const SizeRegion& r) {
        add(ws, r.words.lo, c.words_range);
        add(ws, r.words.hi + 1, c.words_range);
        add(bs, r.bits.lo, c.bits_range);
        add(bs, r.bits.hi + 1, c.bits_range);
    };
    for (const auto& r : c.choice_rules) add_region(r.when);
    for (const auto& r : c.combo_rules) add_region(r.when);
    auto dedupe = [](std::vector<std::int64_t>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    dedupe(ws);
    dedupe(bs);
}

inline void validate_compiler(const Catalog& cat, std::size_t idx) {
    const CompilerSpec& c = cat.compilers[idx];
    const std::string loc = comp_loc(idx, c);
    if (c.name.empty()) throw ValidationError("compilers[" + std::to_string(idx) + "]: empty name");
    if (c.ports < 1) throw ValidationError(loc + ": ports must be >= 1");
    if (c.words_range.lo < 1 || c.words_range.lo > c.words_range.hi)
        throw ValidationError(loc + ": invalid words_range");
    if (c.bits_range.lo < 1 || c.bits_range.lo > c.bits_range.hi)
        throw ValidationError(loc + ": invalid bits_range");

    std::set<std::string> pnames;
    for (std::size_t pi = 0; pi < c.params.size(); ++pi) {
        const ParameterSpec& p = c.params[pi];
        const std::string ploc = loc + ".params[" + std::to_string(pi) + "] ('" + p.name + "')";
        if (p.name.empty()) throw ValidationError(ploc + ": empty parameter name");
        if (!pnames.insert(p.name).second)
            throw ValidationError(ploc + ": duplicate parameter name");
        if (p.labels.empty()) throw ValidationError(ploc + ": parameter has no codes");
        std::set<std::string> labels(p.labels.begin(), p.labels.end());
        if (labels.size() != p.labels.size())
            throw ValidationError(ploc + ": duplicate code label");
    }

    for (std::size_t ri = 0; ri < c.choice_rules.size(); ++ri) {
        const ChoiceRule& r = c.choice_rules[ri];
        const std::string rloc = loc + ".choice_rules[" + std::to_string(ri) + "]";
        validate_region(r.when, rloc);
        const int pi = c.param_index(r.param);
        if (pi < 0) throw ValidationError(rloc + ": unknown parameter '" + r.param + "'");
        if (r.allowed.empty()) throw ValidationError(rloc + ": empty allowed set");
        const int k = c.params[static_cast<std::size_t>(pi)].code_count();
        for (int code : r.allowed)
            if (code < 0 || code >= k)
                throw ValidationError(rloc + ": allowed code " + std::to_string(code) +
                                      " out of range for parameter '" + r.param + "' (" +
                                      std::to_string(k) + " codes)");
    }

    for (std::size_t ri = 0; ri < c.combo_rules.size(); ++ri) {
        const ComboRule& r = c.combo_rules[ri];
        const std::string rloc = loc + ".combo_rules[" + std::to_string(ri) + "]";
        validate_region(r.when, rloc);
        if (r.params.empty()) throw ValidationError(rloc + ": empty parameter list");
        std::set<std::string> seen;
        for (const auto& pname : r.params) {
            if (c.param_index(pname) < 0)
                throw ValidationError(rloc + ": unknown parameter '" + pname + "'");
            if (!seen.insert(pname).second)
                throw ValidationError(rloc + ": parameter '" + pname + "' listed twice");
        }
        if (r.allowed.empty()) throw ValidationError(rloc + ": empty allowed set");
        for (std::size_t ti = 0; ti < r.allowed.size(); ++ti) {
            const auto& tuple = r.allowed[ti];
            if (tuple.size() != r.params.size())
                throw ValidationError(rloc + ".allowed[" + std::to_string(ti) + "]: arity " +
                                      std::to_string(tuple.size()) + " does not match " +
                                      std::to_string(r.params.size()) + " parameters");
            for (std::size_t k = 0; k < tuple.size(); ++k) {
                const int ccount =
                    c.params[static_cast<std::size_t>(c.param_index(r.params[k]))].code_count();
                if (tuple[k] < 0 || tuple[k] >= ccount)
                    throw ValidationError(rloc + ".allowed[" + std::to_string(ti) +
                                          "]: code " + std::to_string(tuple[k]) +
                                          " out of range for parameter '" + r.params[k] + "' (" +
                                          std::to_string(ccount) + " codes)");
            }
        }
    }

    // Rule-region enumeration: at every distinct cell of the (words, bits)
    // grid, each parameter may be governed by at most one combo rule and at
    // most one choice rule, and keeps at least one feasible code.
    std::vector<std::int64_t> ws, bs;
    region_grid(c, ws, bs);
    for (std::int64_t w : ws) {
        for (std::int64_t b : bs) {
            MemoryRequirement probe{"<probe>", w, b, c.ports, c.kind};
            for (const auto& p : c.params) {
                int combo_hits = 0, choice_hits = 0;
                for (const auto& r : c.combo_rules)
                    if (r.when.contains(w, b) &&
                        std::find(r.params.begin(), r.params.end(), p.name) != r.params.end())
                        ++combo_hits;
                for (const auto& r : c.choice_rules)
                    if (r.param == p.name && r.when.contains(w, b)) ++choice_hits;
                if (combo_hits > 1)
                    throw ValidationError(loc + ": parameter '" + p.name +
                                          "' is governed by overlapping combo rules at words=" +
                                          std::to_string(w) + ", bits=" + std::to_string(b));
                if (choice_hits > 1)
                    throw ValidationError(loc + ": parameter '" + p.name +
                                          "' has overlapping choice rules at words=" +
                                          std::to_string(w) + ", bits=" + std::to_string(b));
                if (combo_hits == 0 && feasible_codes(c, probe, p.name).empty())
                    throw ValidationError(loc + ": parameter '" + p.name +
                                          "' has no feasible code at words=" + std::to_string(w) +
                                          ", bits=" + std::to_string(b));
            }
        }
    }

    // Surrogate coverage and positivity.
    if (c.surrogate.size() != cat.objectives.size())
        throw ValidationError(loc + ".surrogate: covers " + std::to_string(c.surrogate.size()) +
                              " objectives, catalog declares " +
                              std::to_string(cat.objectives.size()));
    for (std::size_t oi = 0; oi < c.surrogate.size(); ++oi) {
        const SurrogateObjective& so = c.surrogate[oi];
        const std::string sloc = loc + ".surrogate['" + cat.objectives[oi] + "']";
        for (double coeff : so.base)
            if (!std::isfinite(coeff)) throw ValidationError(sloc + ": non-finite base coefficient");
        // Base is bilinear in (words, bits), so its extremes over the size
        // rectangle sit at the 4 corners; positivity there bounds the rest.
        for (std::int64_t w : {c.words_range.lo, c.words_range.hi}) {
            for (std::int64_t b : {c.bits_range.lo, c.bits_range.hi}) {
                if (!(so.base_value(w, b) > 0.0))
                    throw ValidationError(sloc + ": base is not positive at words=" +
                                          std::to_string(w) + ", bits=" + std::to_string(b));
            }
        }
        if (so.multipliers.size() != c.params.size())
            throw ValidationError(sloc + ": multipliers cover " +
                                  std::to_string(so.multipliers.size()) + " parameters, compiler has " +
                                  std::to_string(c.params.size()));
        for (const auto& p : c.params) {
            auto it = so.multipliers.find(p.name);
            if (it == so.multipliers.end())
                throw ValidationError(sloc + ": missing multipliers for parameter '" + p.name + "'");
            if (static_cast<int>(it->second.size()) != p.code_count())
                throw ValidationError(sloc + ": parameter '" + p.name + "' has " +
                                      std::to_string(p.code_count()) + " codes but " +
                                      std::to_string(it->second.size()) + " multipliers");
            for (double m : it->second)
                if (!(m > 0.0) || !std::isfinite(m))
                    throw ValidationError(sloc + ": non-positive multiplier for parameter '" +
                                          p.name + "'");
        }
    }
}

}  // namespace detail

inline void validate_catalog(const Catalog& cat) {
    if (cat.objectives.empty()) throw ValidationError("catalog declares no objectives");
    std::set<std::string> objs(cat.objectives.begin(), cat.objectives.end());
    if (objs.size() != cat.objectives.size())
        throw ValidationError("catalog: duplicate objective name");
    std::set<std::string> names;
    for (std::size_t i = 0; i < cat.compilers.size(); ++i)
        if (!names.insert(cat.compilers[i].name).second)
            throw ValidationError("compilers[" + std::to_string(i) + "]: duplicate compiler name '" +
                                  cat.compilers[i].name + "'");
    for (std::size_t i = 0; i < cat.compilers.size(); ++i) detail::validate_compiler(cat, i);
}

inline void validate_system(const SystemSpec& sys) {
    if (sys.memories.empty()) throw ValidationError("system has no memories");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < sys.memories.size(); ++i) {
        const MemoryRequirement& m = sys.memories[i];
        const std::string loc = "memories[" + std::to_string(i) + "] ('" + m.id + "')";
        if (m.id.empty()) throw ValidationError("memories[" + std::to_string(i) + "]: empty id");
        if (!ids.insert(m.id).second) throw ValidationError(loc + ": duplicate memory id");
        if (m.words < 1) throw ValidationError(loc + ": words must be >= 1");
        if (m.bits < 1) throw ValidationError(loc + ": bits must be >= 1");
        if (m.ports < 1) throw ValidationError(loc + ": ports must be >= 1");
    }
}

// ---------------------------------------------------------------------------
// JSON (schema documented in README)
// ---------------------------------------------------------------------------

namespace detail {

using json = nlohmann::ordered_json;

inline const json& need(const json& j, const char* key, const std::string& loc) {
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError(loc + ": missing field '" + key + "'");
    return *it;
}

inline std::int64_t need_int(const json& j, const char* key, const std::string& loc) {
    const json& v = need(j, key, loc);
    if (!v.is_number_integer()) throw ValidationError(loc + "." + key + ": expected an integer");
    return v.get<std::int64_t>();
}

inline std::string need_str(const json& j, const char* key, const std::string& loc) {
    const json& v = need(j, key, loc);
    if (!v.is_string()) throw ValidationError(loc + "." + key + ": expected a string");
    return v.get<std::string>();
}

inline IntRange parse_range(const json& v, const std::string& loc) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
        throw ValidationError(loc + ": expected [lo, hi]");
    return IntRange{v[0].get<std::int64_t>(), v[1].get<std::int64_t>()};
}

inline SizeRegion parse_region(const json& j, const std::string& loc) {
    if (!j.is_object()) throw ValidationError(loc + ": expected an object");
    SizeRegion r;
    r.words = parse_range(need(j, "words", loc), loc + ".words");
    r.bits = parse_range(need(j, "bits", loc), loc + ".bits");
    return r;
}

inline json dump_region(const SizeRegion& r) {
    return json{{"words", {r.words.lo, r.words.hi}}, {"bits", {r.bits.lo, r.bits.hi}}};
}

}  // namespace detail

inline Catalog catalog_from_json(const nlohmann::ordered_json& root) {
    using detail::need;
    Catalog cat;
    if (!root.is_object()) throw ValidationError("catalog: top level must be an object");
    for (const auto& o : need(root, "objectives", "catalog")) {
        if (!o.is_string()) throw ValidationError("catalog.objectives: expected strings");
        cat.objectives.push_back(o.get<std::string>());
    }
    const auto& comps = need(root, "compilers", "catalog");
    if (!comps.is_array()) throw ValidationError("catalog.compilers: expected an array");
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const auto& jc = comps[i];
        const std::string loc = "compilers[" + std::to_string(i) + "]";
        CompilerSpec c;
        c.name = detail::need_str(jc, "name", loc);
        c.kind = kind_from_string(detail::need_str(jc, "kind", loc), loc + ".kind");
        c.ports = static_cast<int>(detail::need_int(jc, "ports", loc));
        c.words_range = detail::parse_range(need(jc, "words_range", loc), loc + ".words_range");
        c.bits_range = detail::parse_range(need(jc, "bits_range", loc), loc + ".bits_range");
        for (const auto& jp : need(jc, "params", loc)) {
            ParameterSpec p;
            p.name = detail::need_str(jp, "name", loc + ".params");
            for (const auto& l : need(jp, "codes", loc + ".params ('" + p.name + "')")) {
                if (!l.is_string())
                    throw ValidationError(loc + ".params ('" + p.name + "').codes: expected labels");
                p.labels.push_back(l.get<std::string>());
            }
            c.params.push_back(std::move(p));
        }
        if (jc.contains("choice_rules")) {
            for (const auto& jr : jc["choice_rules"]) {
                const std::string rloc = loc + ".choice_rules";
                ChoiceRule r;
                r.when = detail::parse_region(need(jr, "when", rloc), rloc + ".when");
                r.param = detail::need_str(jr, "param", rloc);
                for (const auto& a : need(jr, "allowed", rloc)) {
                    if (!a.is_number_integer())
                        throw ValidationError(rloc + ".allowed: expected integer codes");
                    r.allowed.push_back(a.get<int>());
                }
                c.choice_rules.push_back(std::move(r));
            }
        }
        if (jc.contains("combo_rules")) {
            for (const auto& jr : jc["combo_rules"]) {
                const std::string rloc = loc + ".combo_rules";
                ComboRule r;
                r.when = detail::parse_region(need(jr, "when", rloc), rloc + ".when");
                for (const auto& p : need(jr, "params", rloc)) {
                    if (!p.is_string()) throw ValidationError(rloc + ".params: expected names");
                    r.params.push_back(p.get<std::string>());
                }
                for (const auto& t : need(jr, "allowed", rloc)) {
                    if (!t.is_array()) throw ValidationError(rloc + ".allowed: expected tuples");
                    std::vector<int> tuple;
                    for (const auto& v : t) {
                        if (!v.is_number_integer())
                            throw ValidationError(rloc + ".allowed: expected integer codes");
                        tuple.push_back(v.get<int>());
                    }
                    r.allowed.push_back(std::move(tuple));
                }
                c.combo_rules.push_back(std::move(r));
            }
        }
        const auto& js = need(jc, "surrogate", loc);
        if (!js.is_object()) throw ValidationError(loc + ".surrogate: expected an object");
        for (std::size_t oi = 0; oi < cat.objectives.size(); ++oi) {
            const std::string& obj = cat.objectives[oi];
            const std::string sloc = loc + ".surrogate['" + obj + "']";
            auto it = js.find(obj);
            if (it == js.end())
                throw ValidationError(loc + ".surrogate: missing objective '" + obj + "'");
            SurrogateObjective so;
            const auto& jb = need(*it, "base", sloc);
            if (!jb.is_array() || jb.size() != 4)
                throw ValidationError(sloc + ".base: expected [c0, c1, c2, c3]");
            for (std::size_t k = 0; k < 4; ++k) {
                if (!jb[k].is_number()) throw ValidationError(sloc + ".base: expected numbers");
                so.base[k] = jb[k].get<double>();
            }
            const auto& jm = need(*it, "multipliers", sloc);
            if (!jm.is_object()) throw ValidationError(sloc + ".multipliers: expected an object");
            for (auto mit = jm.begin(); mit != jm.end(); ++mit) {
                std::vector<double> ms;
                for (const auto& v : mit.value()) {
                    if (!v.is_number())
                        throw ValidationError(sloc + ".multipliers['" + mit.key() +
                                              "']: expected numbers");
                    ms.push_back(v.get<double>());
                }
                so.multipliers[mit.key()] = std::move(ms);
            }
            c.surrogate.push_back(std::move(so));
        }
        cat.compilers.push_back(std::move(c));
    }
    validate_catalog(cat);
    return cat;
}

inline nlohmann::ordered_json catalog_to_json(const Catalog& cat) {
    using detail::json;
    json root;
    root["objectives"] = cat.objectives;
    root["compilers"] = json::array();
    for (const auto& c : cat.compilers) {
        json jc;
        jc["name"] = c.name;
        jc["kind"] = to_string(c.kind);
        jc["ports"] = c.ports;
        jc["words_range"] = {c.words_range.lo, c.words_range.hi};
        jc["bits_range"] = {c.bits_range.lo, c.bits_range.hi};
        jc["params"] = json::array();
        for (const auto& p : c.params) jc["params"].push_back({{"name", p.name}, {"codes", p.labels}});
        if (!c.choice_rules.empty()) {
            jc["choice_rules"] = json::array();
            for (const auto& r : c.choice_rules)
                jc["choice_rules"].push_back(
                    {{"when", detail::dump_region(r.when)}, {"param", r.param}, {"allowed", r.allowed}});
        }
        if (!c.combo_rules.empty()) {
            jc["combo_rules"] = json::array();
            for (const auto& r : c.combo_rules)
                jc["combo_rules"].push_back(
                    {{"when", detail::dump_region(r.when)}, {"params", r.params}, {"allowed", r.allowed}});
        }
        json js;
        for (std::size_t oi = 0; oi < cat.objectives.size(); ++oi) {
            const SurrogateObjective& so = c.surrogate[oi];
            json jm;
            for (const auto& p : c.params) jm[p.name] = so.multipliers.at(p.name);
            js[cat.objectives[oi]] = {{"base", so.base}, {"multipliers", jm}};
        }
        jc["surrogate"] = js;
        root["compilers"].push_back(std::move(jc));
    }
    return root;
}

inline SystemSpec system_from_json(const nlohmann::ordered_json& root) {
    SystemSpec sys;
    if (!root.is_object()) throw ValidationError("system: top level must be an object");
    const auto& mems = detail::need(root, "memories", "system");
    if (!mems.is_array()) throw ValidationError("system.memories: expected an array");
    for (std::size_t i = 0; i < mems.size(); ++i) {
        const auto& jm = mems[i];
        const std::string loc = "memories[" + std::to_string(i) + "]";
        MemoryRequirement m;
        m.id = detail::need_str(jm, "id", loc);
        m.words = detail::need_int(jm, "words", loc);
        m.bits = detail::need_int(jm, "bits", loc);
        m.ports = static_cast<int>(detail::need_int(jm, "ports", loc));
        m.kind = kind_from_string(detail::need_str(jm, "kind", loc), loc + ".kind");
        sys.memories.push_back(std::move(m));
    }
    validate_system(sys);
    return sys;
}

inline nlohmann::ordered_json system_to_json(const SystemSpec& sys) {
    using detail::json;
    json root;
    root["memories"] = json::array();
    for (const auto& m : sys.memories)
        root["memories"].push_back({{"id", m.id},
                                    {"words", m.words},
                                    {"bits", m.bits},
                                    {"ports", m.ports},
                                    {"kind", to_string(m.kind)}});
    return root;
}

namespace detail {

inline nlohmann::ordered_json parse_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    try {
        return nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("'" + path + "': " + e.what());
    }
}

}  // namespace detail

inline Catalog load_catalog(const std::string& path) {
    return catalog_from_json(detail::parse_json_file(path));
}

inline SystemSpec load_system(const std::string& path) {
    return system_from_json(detail::parse_json_file(path));
}

// ---------------------------------------------------------------------------
// Synthetic design spaces
// ---------------------------------------------------------------------------

namespace detail {

// Random subset of the K0 x K1 tuple grid that always keeps the two corner
// tuples (0,0) and (K0-1,K1-1) and at least half of all tuples. The corners
// guarantee a genuine area/power trade-off inside the group.
inline std::vector<std::vector<int>> draw_tuple_subset(Rng& rng, int k0, int k1) {
    std::vector<std::vector<int>> all;
    for (int a = 0; a < k0; ++a)
        for (int b = 0; b < k1; ++b) all.push_back({a, b});
    const std::size_t total = all.size();
    const std::size_t min_size = (total + 1) / 2;
    const std::size_t size = min_size + rng.below(total - min_size + 1);
    for (std::size_t i = total - 1; i > 0; --i)
        std::swap(all[i], all[rng.below(i + 1)]);
    std::vector<std::vector<int>> subset(all.begin(), all.begin() + static_cast<long>(size));
    auto ensure = [&](std::vector<int> t) {
        if (std::find(subset.begin(), subset.end(), t) == subset.end()) subset.push_back(std::move(t));
    };
    ensure({0, 0});
    ensure({k0 - 1, k1 - 1});
    std::sort(subset.begin(), subset.end());
    return subset;
}

inline std::pair<Catalog, SystemSpec> generate_attempt(Rng& rng, std::size_t n_memories,
                                                       std::size_t n_compilers,
                                                       std::uint64_t target) {
    Catalog cat;
    cat.objectives = {"area", "power"};

    const IntRange words_range{64, 16384};
    const IntRange bits_range{4, 160};
    const double per_compiler_target =
        std::max(1.0, static_cast<double>(target) / static_cast<double>(n_compilers));

    for (std::size_t ci = 0; ci < n_compilers; ++ci) {
        CompilerSpec c;
        c.name = "syn" + std::to_string(ci);
        c.kind = MemoryKind::kSram;
        c.ports = 1;
        c.words_range = words_range;
        c.bits_range = bits_range;

        // Code counts multiply up to a full design space in
        // [target_c, 4*target_c); rules below can cut it to a quarter.
        std::vector<int> code_counts;
        double product = 1.0;
        while (product < per_compiler_target && code_counts.size() < 10) {
            const int k = static_cast<int>(rng.range(2, 4));
            code_counts.push_back(k);
            product *= k;
        }
        while (code_counts.size() < 2) {
            code_counts.push_back(2);
            product *= 2;
        }
        for (std::size_t pi = 0; pi < code_counts.size(); ++pi) {
            ParameterSpec p;
            p.name = "p" + std::to_string(pi);
            for (int k = 0; k < code_counts[pi]; ++k) p.labels.push_back("v" + std::to_string(k));
            c.params.push_back(std::move(p));
        }

        // One combo pair over (p0, p1), with a words split so different
        // memories see different allowed sets.
        const std::int64_t split =
            words_range.lo + rng.range(1, words_range.hi - words_range.lo - 1);
        ComboRule low, high;
        low.when = {{words_range.lo, split}, bits_range};
        high.when = {{split + 1, words_range.hi}, bits_range};
        low.params = high.params = {"p0", "p1"};
        low.allowed = draw_tuple_subset(rng, code_counts[0], code_counts[1]);
        high.allowed = draw_tuple_subset(rng, code_counts[0], code_counts[1]);
        c.combo_rules = {low, high};

        // Optionally restrict one free parameter for large word counts.
        if (code_counts.size() >= 3 && rng.below(2) == 0) {
            const int k = code_counts[2];
            ChoiceRule r;
            const std::int64_t csplit =
                words_range.lo + rng.range(1, words_range.hi - words_range.lo - 1);
            r.when = {{csplit, words_range.hi}, bits_range};
            r.param = "p2";
            std::vector<int> codes(static_cast<std::size_t>(k));
            for (int j = 0; j < k; ++j) codes[static_cast<std::size_t>(j)] = j;
            for (std::size_t i = codes.size() - 1; i > 0; --i)
                std::swap(codes[i], codes[rng.below(i + 1)]);
            const std::size_t keep = (static_cast<std::size_t>(k) + 1) / 2 +
                                     rng.below(static_cast<std::size_t>(k) / 2 + 1);
            codes.resize(std::min(codes.size(), keep));
            std::sort(codes.begin(), codes.end());
            r.allowed = codes;
            c.choice_rules.push_back(std::move(r));
        }

        // Anti-monotone multipliers: higher codes trade area against power.
        // Compiler base quality is drawn per objective; a compiler may lead
        // on both objectives or specialize in one.
        SurrogateObjective area, power;
        const double area_scale = rng.uniform(0.8, 1.25);
        const double power_scale = rng.uniform(0.8, 1.25);
        area.base = {rng.uniform(0.5, 2.0) * area_scale, rng.uniform(2e-4, 1e-3) * area_scale,
                     rng.uniform(1e-4, 5e-4) * area_scale, rng.uniform(1e-3, 5e-3) * area_scale};
        power.base = {rng.uniform(0.2, 1.0) * power_scale, rng.uniform(1e-4, 6e-4) * power_scale,
                      rng.uniform(1e-4, 4e-4) * power_scale, rng.uniform(5e-4, 3e-3) * power_scale};
        for (std::size_t pi = 0; pi < c.params.size(); ++pi) {
            const auto& p = c.params[pi];
            // The combo-governed pair acts as the dominant organization
            // knobs; later parameters are fine-tuning options with mild
            // impact, as with real compilers.
            const bool major = pi < 2;
            const double s_area = major ? rng.uniform(0.15, 0.30) : rng.uniform(0.01, 0.04);
            const double s_power = major ? rng.uniform(0.15, 0.30) : rng.uniform(0.01, 0.04);
            std::vector<double> ma, mp;
            for (int j = 0; j < p.code_count(); ++j) {
                ma.push_back(std::pow(1.0 + s_area, -static_cast<double>(j)));
                mp.push_back(std::pow(1.0 + s_power, static_cast<double>(j)));
            }
            area.multipliers[p.name] = std::move(ma);
            power.multipliers[p.name] = std::move(mp);
        }
        c.surrogate = {area, power};
        cat.compilers.push_back(std::move(c));
    }

    SystemSpec sys;
    for (std::size_t mi = 0; mi < n_memories; ++mi) {
        MemoryRequirement m;
        m.id = "mem" + std::to_string(mi);
        m.words = std::int64_t{1} << rng.range(7, 13);
        m.bits = rng.range(8, 128);
        m.ports = 1;
        m.kind = MemoryKind::kSram;
        sys.memories.push_back(std::move(m));
    }
    return {std::move(cat), std::move(sys)};
}

}  // namespace detail

// Deterministic synthetic (Catalog, SystemSpec) pair whose per-memory
// candidate counts land within [0.25x, 4x] of the requested target.
inline std::pair<Catalog, SystemSpec> generate_synthetic_system(
    std::uint64_t seed, std::size_t n_memories, std::size_t n_compilers,
    std::uint64_t candidates_per_memory_target) {
    if (n_memories < 1 || n_compilers < 1 || candidates_per_memory_target < 1)
        throw std::invalid_argument("generate_synthetic_system: all counts must be >= 1");
    const double lo = 0.25 * static_cast<double>(candidates_per_memory_target);
    const double hi = 4.0 * static_cast<double>(candidates_per_memory_target);
    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
        Rng rng(seed ^ (attempt * 0x9E3779B97F4A7C15ULL));
        auto [cat, sys] = detail::generate_attempt(rng, n_memories, n_compilers,
                                                   candidates_per_memory_target);
        bool ok = true;
        for (const auto& m : sys.memories) {
            const double n = static_cast<double>(count_memory_candidates(cat, m));
            if (n < lo || n > hi) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        validate_catalog(cat);
        validate_system(sys);
        return {std::move(cat), std::move(sys)};
    }
    throw Error("generate_synthetic_system: could not hit the candidate target; "
                "adjust target or compiler count");
}

}  // namespace memsys
