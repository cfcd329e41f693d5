#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "memsys/core.hpp"

namespace memsys {

struct ObjectiveStats {
    double mean = 0, sd = 0, min = 0, q1 = 0, q2 = 0, q3 = 0, max = 0;
};

struct FrontStats {
    std::size_t count = 0;
    std::size_t unique_count = 0;  // distinct objective vectors
    std::vector<ObjectiveStats> per_objective;
};

namespace detail {

// Linear interpolation between order statistics at position p*(n-1).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = p * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Sample standard deviation, divisor n-1; 0 for a single value.
inline double sd_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0;
    for (double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace detail

inline FrontStats front_stats(const std::vector<ObjectiveVector>& front) {
    if (front.empty()) throw std::invalid_argument("front_stats: empty front");
    FrontStats out;
    out.count = front.size();
    out.unique_count = std::set<ObjectiveVector>(front.begin(), front.end()).size();
    const std::size_t arity = front.front().size();
    for (std::size_t m = 0; m < arity; ++m) {
        std::vector<double> v;
        v.reserve(front.size());
        for (const auto& p : front) {
            if (p.size() != arity) throw std::invalid_argument("front_stats: arity mismatch");
            v.push_back(p[m]);
        }
        std::sort(v.begin(), v.end());
        ObjectiveStats s;
        s.min = v.front();
        s.max = v.back();
        s.q1 = detail::quantile_sorted(v, 0.25);
        s.q2 = detail::quantile_sorted(v, 0.5);
        s.q3 = detail::quantile_sorted(v, 0.75);
        s.mean = detail::mean_of(v);
        s.sd = detail::sd_of(v, s.mean);
        out.per_objective.push_back(s);
    }
    return out;
}

inline const std::vector<std::string>& deviation_statistics() {
    static const std::vector<std::string> names{"count", "mean", "SD", "min",
                                               "Q1",    "Q2",   "Q3", "max"};
    return names;
}

struct DeviationCell {
    double mean = 0;
    double sd = 0;
    bool defined = false;  // false when the base statistic is 0
};

// Relative deviation (found - base)/base of each front statistic, aggregated
// over repetitions: cells[statistic][objective].
struct DeviationReport {
    std::vector<std::string> objectives;
    std::vector<std::vector<DeviationCell>> cells;
    std::size_t repetitions = 0;
    std::size_t base_count = 0;
    std::size_t base_unique_count = 0;
};

namespace detail {

inline double pick_stat(const FrontStats& fs, std::size_t stat, std::size_t objective) {
    const ObjectiveStats& s = fs.per_objective[objective];
    switch (stat) {
        case 0: return static_cast<double>(fs.count);
        case 1: return s.mean;
        case 2: return s.sd;
        case 3: return s.min;
        case 4: return s.q1;
        case 5: return s.q2;
        case 6: return s.q3;
        default: return s.max;
    }
}

}  // namespace detail

inline DeviationReport deviation_report(const std::vector<std::vector<ObjectiveVector>>& found_fronts,
                                        const std::vector<ObjectiveVector>& base_front,
                                        const std::vector<std::string>& objective_names) {
    if (found_fronts.empty()) throw std::invalid_argument("deviation_report: no repetitions");
    const FrontStats base = front_stats(base_front);
    if (base.per_objective.size() != objective_names.size())
        throw std::invalid_argument("deviation_report: objective name count mismatch");
    std::vector<FrontStats> found;
    found.reserve(found_fronts.size());
    for (const auto& f : found_fronts) {
        found.push_back(front_stats(f));
        if (found.back().per_objective.size() != base.per_objective.size())
            throw std::invalid_argument("deviation_report: front arity mismatch");
    }

    DeviationReport report;
    report.objectives = objective_names;
    report.repetitions = found_fronts.size();
    report.base_count = base.count;
    report.base_unique_count = base.unique_count;
    const std::size_t n_stats = deviation_statistics().size();
    report.cells.assign(n_stats, std::vector<DeviationCell>(objective_names.size()));
    for (std::size_t s = 0; s < n_stats; ++s) {
        for (std::size_t m = 0; m < objective_names.size(); ++m) {
            const double base_v = detail::pick_stat(base, s, m);
            DeviationCell& cell = report.cells[s][m];
            if (base_v == 0.0) {
                cell.defined = false;
                continue;
            }
            std::vector<double> devs;
            devs.reserve(found.size());
            for (const auto& fs : found)
                devs.push_back((detail::pick_stat(fs, s, m) - base_v) / base_v);
            cell.mean = detail::mean_of(devs);
            cell.sd = detail::sd_of(devs, cell.mean);
            cell.defined = true;
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string format_pct(double fraction) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%+.2f%%", fraction * 100.0);
    return buf;
}

}  // namespace detail

// CSV: one row per statistic; per objective a deviation-mean and
// deviation-SD column, values as full-precision percentages.
inline std::string deviation_report_csv(const DeviationReport& report) {
    std::ostringstream out;
    out << "statistic";
    for (const auto& obj : report.objectives)
        out << "," << obj << "_dev_mean_pct," << obj << "_dev_sd_pct";
    out << "\n";
    for (std::size_t s = 0; s < report.cells.size(); ++s) {
        out << deviation_statistics()[s];
        for (const auto& cell : report.cells[s]) {
            if (!cell.defined) {
                out << ",n/a,n/a";
            } else {
                out << "," << detail::format_full(cell.mean * 100.0) << ","
                    << detail::format_full(cell.sd * 100.0);
            }
        }
        out << "\n";
    }
    return out.str();
}

// Aligned markdown table: rows count/mean/SD/min/Q1/Q2/Q3/max, a
// (deviation mean, deviation SD) column pair per objective.
inline std::string deviation_report_markdown(const DeviationReport& report) {
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{"statistic"};
    for (const auto& obj : report.objectives) {
        header.push_back(obj + " dev mean");
        header.push_back(obj + " dev SD");
    }
    grid.push_back(header);
    for (std::size_t s = 0; s < report.cells.size(); ++s) {
        std::vector<std::string> row{deviation_statistics()[s]};
        for (const auto& cell : report.cells[s]) {
            if (!cell.defined) {
                row.push_back("n/a");
                row.push_back("n/a");
            } else {
                row.push_back(detail::format_pct(cell.mean));
                row.push_back(detail::format_pct(cell.sd));
            }
        }
        grid.push_back(std::move(row));
    }

    std::vector<std::size_t> widths(grid[0].size(), 0);
    for (const auto& row : grid)
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    std::ostringstream out;
    out << "Deviation from the exhaustive front over " << report.repetitions
        << " repetition(s); base front count " << report.base_count << " ("
        << report.base_unique_count << " unique)\n\n";
    auto emit_row = [&](const std::vector<std::string>& row) {
        out << "|";
        for (std::size_t c = 0; c < row.size(); ++c) {
            out << " " << row[c] << std::string(widths[c] - row[c].size(), ' ') << " |";
        }
        out << "\n";
    };
    emit_row(grid[0]);
    out << "|";
    for (std::size_t c = 0; c < widths.size(); ++c) out << std::string(widths[c] + 2, '-') << "|";
    out << "\n";
    for (std::size_t r = 1; r < grid.size(); ++r) emit_row(grid[r]);
    return out.str();
}

}  // namespace memsys
