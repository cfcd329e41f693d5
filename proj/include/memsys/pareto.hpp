#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "memsys/core.hpp"

namespace memsys {

// Strict Pareto dominance, all objectives minimized.
inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("dominates: arity mismatch (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
    bool strict = false;
    for (std::size_t m = 0; m < a.size(); ++m) {
        if (a[m] > b[m]) return false;
        if (a[m] < b[m]) strict = true;
    }
    return strict;
}

struct FrontMember {
    ObjectiveVector objective;
    std::size_t payload_index = 0;
};

// Deb bookkeeping: fronts of indices into `members`, each front ascending.
inline std::vector<std::vector<std::size_t>> fast_nondominated_sort(
    const std::vector<FrontMember>& members) {
    if (members.empty()) throw std::invalid_argument("fast_nondominated_sort: empty input");
    const std::size_t n = members.size();
    std::vector<std::vector<std::size_t>> dominated_by(n);
    std::vector<std::size_t> domination_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (dominates(members[i].objective, members[j].objective))
                dominated_by[i].push_back(j);
            else if (dominates(members[j].objective, members[i].objective))
                ++domination_count[i];
        }
        if (domination_count[i] == 0) fronts[0].push_back(i);
    }
    std::size_t k = 0;
    while (!fronts[k].empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : fronts[k]) {
            for (std::size_t j : dominated_by[i]) {
                if (--domination_count[j] == 0) next.push_back(j);
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(next));
        ++k;
    }
    fronts.pop_back();
    return fronts;
}

// NSGA-II crowding distances, aligned with `front`. Boundary members of each
// objective's ordering get +infinity; interior members accumulate
// (next - prev)/(max - min); objectives with max = min contribute nothing.
inline std::vector<double> crowding_distance(const std::vector<ObjectiveVector>& front) {
    if (front.empty()) throw std::invalid_argument("crowding_distance: empty front");
    const std::size_t n = front.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    const std::size_t arity = front.front().size();
    std::vector<std::size_t> order(n);
    for (std::size_t m = 0; m < arity; ++m) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return front[a][m] < front[b][m];
        });
        const double range = front[order.back()][m] - front[order.front()][m];
        if (range == 0.0) continue;
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (dist[order[i]] == inf) continue;
            dist[order[i]] += (front[order[i + 1]][m] - front[order[i - 1]][m]) / range;
        }
    }
    return dist;
}

// Elitist environmental selection: fill whole fronts in rank order; the last
// partially admitted front is ordered by crowding distance descending (ties
// broken toward the lower payload_index) and truncated.
inline std::vector<std::size_t> nsga2_select(const std::vector<FrontMember>& members,
                                             std::size_t n_select) {
    if (n_select > members.size())
        throw std::invalid_argument("nsga2_select: cannot select " + std::to_string(n_select) +
                                    " from " + std::to_string(members.size()) + " members");
    std::vector<std::size_t> out;
    out.reserve(n_select);
    for (const auto& front : fast_nondominated_sort(members)) {
        if (out.size() == n_select) break;
        if (out.size() + front.size() <= n_select) {
            out.insert(out.end(), front.begin(), front.end());
            continue;
        }
        std::vector<ObjectiveVector> objs;
        objs.reserve(front.size());
        for (std::size_t i : front) objs.push_back(members[i].objective);
        const std::vector<double> crowd = crowding_distance(objs);
        std::vector<std::size_t> pos(front.size());
        std::iota(pos.begin(), pos.end(), std::size_t{0});
        std::stable_sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
            if (crowd[a] != crowd[b]) return crowd[a] > crowd[b];
            return members[front[a]].payload_index < members[front[b]].payload_index;
        });
        for (std::size_t k = 0; out.size() < n_select; ++k) out.push_back(front[pos[k]]);
        break;
    }
    return out;
}

namespace detail {

// Recursive skyline over `order[lo, hi)`, which is sorted lexicographically
// by objective vector. A later point can never dominate an earlier one, so
// the merge only filters the right half against the left half's skyline.
inline std::vector<std::size_t> skyline_range(const std::vector<ObjectiveVector>& points,
                                              const std::vector<std::size_t>& order,
                                              std::size_t lo, std::size_t hi) {
    const std::size_t n = hi - lo;
    if (n <= 64) {
        std::vector<std::size_t> keep;
        for (std::size_t i = lo; i < hi; ++i) {
            bool dominated = false;
            for (std::size_t j = lo; j < hi && !dominated; ++j)
                if (j != i && dominates(points[order[j]], points[order[i]])) dominated = true;
            if (!dominated) keep.push_back(order[i]);
        }
        return keep;
    }
    const std::size_t mid = lo + n / 2;
    std::vector<std::size_t> left = skyline_range(points, order, lo, mid);
    const std::vector<std::size_t> right = skyline_range(points, order, mid, hi);
    for (std::size_t r : right) {
        bool dominated = false;
        for (std::size_t l : left) {
            if (dominates(points[l], points[r])) {
                dominated = true;
                break;
            }
        }
        if (!dominated) left.push_back(r);
    }
    return left;
}

}  // namespace detail

// Indices of the non-dominated subset, ascending. Duplicates of a
// non-dominated point are all retained (equal vectors never dominate).
inline std::vector<std::size_t> skyline_dc(const std::vector<ObjectiveVector>& points) {
    if (points.empty()) throw std::invalid_argument("skyline_dc: empty input");
    const std::size_t arity = points.front().size();
    for (const auto& p : points)
        if (p.size() != arity) throw std::invalid_argument("skyline_dc: arity mismatch");
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a] != points[b]) return points[a] < points[b];
        return a < b;
    });
    std::vector<std::size_t> keep = detail::skyline_range(points, order, 0, points.size());
    std::sort(keep.begin(), keep.end());
    return keep;
}

}  // namespace memsys
