#pragma once

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "memsys/baseline.hpp"
#include "memsys/catalog.hpp"
#include "memsys/core.hpp"
#include "memsys/engine.hpp"

namespace memsys {

using FrontEntry = std::pair<Parameterization, ObjectiveVector>;

namespace detail {

inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Codes rendered "a=0;b=2" in the compiler's declared parameter order.
inline std::string codes_cell(const Catalog& catalog, const MemoryParameterization& mp) {
    const CompilerSpec& comp =
        catalog.compilers[static_cast<std::size_t>(catalog.compiler_index(mp.compiler))];
    std::string out;
    for (const auto& p : comp.params) {
        if (!out.empty()) out += ";";
        out += p.name + "=" + std::to_string(mp.codes.at(p.name));
    }
    return out;
}

}  // namespace detail

inline nlohmann::ordered_json parameterization_to_json(const Catalog& catalog,
                                                       const Parameterization& params) {
    nlohmann::ordered_json mems = nlohmann::ordered_json::array();
    for (const auto& mp : params) {
        const CompilerSpec& comp =
            catalog.compilers[static_cast<std::size_t>(catalog.compiler_index(mp.compiler))];
        nlohmann::ordered_json codes;
        for (const auto& p : comp.params) codes[p.name] = mp.codes.at(p.name);
        mems.push_back({{"id", mp.memory_id}, {"compiler", mp.compiler}, {"codes", std::move(codes)}});
    }
    return {{"memories", std::move(mems)}};
}

inline nlohmann::ordered_json front_to_json(const Catalog& catalog,
                                            const std::vector<FrontEntry>& front) {
    nlohmann::ordered_json points = nlohmann::ordered_json::array();
    for (const auto& [params, objective] : front) {
        nlohmann::ordered_json pt = parameterization_to_json(catalog, params);
        pt["objective"] = objective;
        points.push_back(std::move(pt));
    }
    return {{"objectives", catalog.objectives}, {"points", std::move(points)}};
}

// CSV columns: one per objective, then per memory "<id>:compiler" and
// "<id>:codes".
inline std::string front_to_csv(const Catalog& catalog, const SystemSpec& sys,
                                const std::vector<FrontEntry>& front) {
    std::ostringstream out;
    for (std::size_t m = 0; m < catalog.objectives.size(); ++m)
        out << (m ? "," : "") << catalog.objectives[m];
    for (const auto& mem : sys.memories) out << "," << mem.id << ":compiler," << mem.id << ":codes";
    out << "\n";
    for (const auto& [params, objective] : front) {
        for (std::size_t m = 0; m < objective.size(); ++m)
            out << (m ? "," : "") << detail::format_g17(objective[m]);
        for (const auto& mp : params)
            out << "," << mp.compiler << "," << detail::codes_cell(catalog, mp);
        out << "\n";
    }
    return out.str();
}

inline std::string history_to_csv(const Catalog& catalog,
                                  const std::vector<std::vector<ObjectiveVector>>& history) {
    std::ostringstream out;
    out << "generation,member";
    for (const auto& obj : catalog.objectives) out << "," << obj;
    out << "\n";
    for (std::size_t g = 0; g < history.size(); ++g) {
        for (std::size_t i = 0; i < history[g].size(); ++i) {
            out << g << "," << i;
            for (double v : history[g][i]) out << "," << detail::format_g17(v);
            out << "\n";
        }
    }
    return out.str();
}

// Baseline front points share the engine front's serialized shape.
inline std::vector<FrontEntry> baseline_front_entries(const CandidateTable& table,
                                                      const std::vector<FrontPoint>& front) {
    std::vector<FrontEntry> out;
    out.reserve(front.size());
    for (const auto& fp : front) {
        Parameterization params;
        for (std::size_t m = 0; m < fp.candidate_indices.size(); ++m)
            params.push_back(table.per_memory[m][fp.candidate_indices[m]].param);
        out.emplace_back(std::move(params), fp.objective);
    }
    return out;
}

// Objective vectors of a front file written by front_to_json.
inline std::pair<std::vector<std::string>, std::vector<ObjectiveVector>> read_front_json(
    const std::string& path) {
    const nlohmann::ordered_json root = detail::parse_json_file(path);
    if (!root.is_object() || !root.contains("objectives") || !root.contains("points"))
        throw ValidationError("'" + path + "': not a front file (objectives/points missing)");
    std::vector<std::string> objectives;
    for (const auto& o : root["objectives"]) objectives.push_back(o.get<std::string>());
    std::vector<ObjectiveVector> points;
    for (const auto& pt : root["points"]) {
        if (!pt.is_object() || !pt.contains("objective"))
            throw ValidationError("'" + path + "': front point without objective");
        ObjectiveVector v;
        for (const auto& x : pt["objective"]) {
            if (!x.is_number()) throw ValidationError("'" + path + "': non-numeric objective");
            v.push_back(x.get<double>());
        }
        if (v.size() != objectives.size())
            throw ValidationError("'" + path + "': objective arity mismatch");
        points.push_back(std::move(v));
    }
    if (points.empty()) throw ValidationError("'" + path + "': front file has no points");
    return {std::move(objectives), std::move(points)};
}

// ---------------------------------------------------------------------------
// File output
// ---------------------------------------------------------------------------

// Write-temp-then-rename so readers never observe a partial file.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out.flush()) throw Error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() + "'");
}

inline std::string utc_now_string() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace memsys
