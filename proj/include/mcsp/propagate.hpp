#pragma once

// Symmetric (1,2)-consistency as support-based pruning to a fixpoint.

#include <algorithm>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mcsp/structures.hpp"

namespace mcsp {

// One removed value. `neighbor` is the variable whose constraint lacked
// support, or -1 when the removal came from another rule (see `reason`).
struct Removal {
    int var = 0;
    int value = 0;
    int neighbor = -1;
    std::string reason = "support";

    bool operator==(const Removal&) const = default;
};

enum class PropagationStatus { SatPossible, Empty };

inline const char* to_string(PropagationStatus s) { return s == PropagationStatus::Empty ? "EMPTY" : "SAT-POSSIBLE"; }

struct PropagationResult {
    PropagationStatus status = PropagationStatus::SatPossible;
    BinaryInstance reduced;
    std::vector<Removal> removal_log;
};

// Both projections of `pairs` equal the given domains.
inline bool is_subdirect(const std::vector<std::pair<int, int>>& pairs, const std::vector<int>& left, const std::vector<int>& right) {
    std::vector<int> l, r;
    for (auto [a, b] : pairs) {
        l.push_back(a);
        r.push_back(b);
    }
    auto norm = [](std::vector<int> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    };
    return norm(l) == norm(left) && norm(r) == norm(right);
}

// Scan triples (x, a, y): value a of P_x is checked for support in E[x][y].
using ScanOrder = std::vector<std::tuple<int, int, int>>;

inline ScanOrder default_scan_order(int num_variables, int universe_size) {
    ScanOrder order;
    for (int x = 0; x < num_variables; ++x)
        for (int a = 0; a < universe_size; ++a)
            for (int y = 0; y < num_variables; ++y) order.emplace_back(x, a, y);
    return order;
}

namespace detail {

inline bool has_support(const BinaryInstance& g, int x, int a, int y) {
    for (int b = 0; b < g.universe_size(); ++b)
        if (g.in_domain(y, b) && g.allows(x, y, a, b)) return true;
    return false;
}

} // namespace detail

// Removes unsupported values until nothing changes, sweeping `order`
// repeatedly. The fixpoint does not depend on the order.
inline PropagationResult run_12_consistency(const BinaryInstance& graph, const ScanOrder& order) {
    auto report = check_syntactic_simplicity(graph);
    if (!report.empty()) throw InvalidInput("malformed binary instance: " + report.front());
    PropagationResult res;
    res.reduced = graph;
    BinaryInstance& g = res.reduced;
    for (const auto& [x, a, y] : order)
        if (x < 0 || y < 0 || x >= g.num_variables() || y >= g.num_variables() || a < 0 || a >= g.universe_size())
            throw InvalidInput("scan order names an unknown variable or value");
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& [x, a, y] : order) {
            if (!g.in_domain(x, a) || detail::has_support(g, x, a, y)) continue;
            g.remove_value(x, a);
            res.removal_log.push_back({x, a, y, "support"});
            changed = true;
        }
    }
    for (int x = 0; x < g.num_variables(); ++x)
        if (g.domain_size(x) == 0) res.status = PropagationStatus::Empty;
    return res;
}

inline PropagationResult run_12_consistency(const BinaryInstance& graph) {
    return run_12_consistency(graph, default_scan_order(graph.num_variables(), graph.universe_size()));
}

inline bool all_subdirect(const BinaryInstance& g) {
    for (int x = 0; x < g.num_variables(); ++x)
        for (int y = 0; y < g.num_variables(); ++y)
            if (!is_subdirect(g.pairs(x, y), g.domain(x), g.domain(y))) return false;
    return true;
}

} // namespace mcsp
