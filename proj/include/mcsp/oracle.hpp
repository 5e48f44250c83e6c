#pragma once

// Brute-force reference implementations. Only the plain data types are
// shared with the solver.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "mcsp/algebra.hpp"
#include "mcsp/structures.hpp"

namespace mcsp {

enum class OracleMode { First, Count, All };

inline constexpr std::uint64_t kDefaultOracleCap = 10'000'000;

struct SolutionSet {
    std::vector<Assignment> solutions;  // lexicographic order
    std::uint64_t count = 0;
    bool truncated = false;             // mode First stopped early
};

namespace detail {

class Backtracker {
public:
    Backtracker(const Instance& inst, OracleMode mode, std::uint64_t cap) : inst_(inst), mode_(mode), cap_(cap) {
        by_last_.assign(inst.num_variables, {});
        for (std::size_t ci = 0; ci < inst.constraints.size(); ++ci) {
            const auto& sc = inst.constraints[ci].scope;
            int last = sc.empty() ? 0 : *std::max_element(sc.begin(), sc.end());
            by_last_[last].push_back(static_cast<int>(ci));
            sets_.push_back(std::set<Tuple>(inst.relations[inst.constraints[ci].relation].tuples.begin(),
                                            inst.relations[inst.constraints[ci].relation].tuples.end()));
        }
        cur_.assign(inst.num_variables, kUnassigned);
    }

    SolutionSet run() {
        go(0);
        return std::move(out_);
    }

private:
    bool ok_at(int x) const {
        Tuple t;
        for (int ci : by_last_[x]) {
            t.clear();
            for (int v : inst_.constraints[ci].scope) t.push_back(cur_[v]);
            if (!sets_[ci].count(t)) return false;
        }
        return true;
    }

    // Returns false to stop the search.
    bool go(int x) {
        if (x == inst_.num_variables) {
            ++out_.count;
            if (mode_ != OracleMode::Count) out_.solutions.push_back(cur_);
            if (mode_ == OracleMode::First) {
                out_.truncated = true;
                return false;
            }
            return true;
        }
        for (int a : inst_.domains[x]) {
            if (++nodes_ > cap_) throw CapExceeded("oracle node cap exceeded");
            cur_[x] = a;
            if (ok_at(x) && !go(x + 1)) return false;
        }
        cur_[x] = kUnassigned;
        return true;
    }

    const Instance& inst_;
    OracleMode mode_;
    std::uint64_t cap_;
    std::uint64_t nodes_ = 0;
    std::vector<std::vector<int>> by_last_;
    std::vector<std::set<Tuple>> sets_;
    Assignment cur_;
    SolutionSet out_;
};

} // namespace detail

// Backtracking in ascending variable order; each constraint is checked as
// soon as its last variable is assigned.
inline SolutionSet brute_force_solve(const Instance& inst, OracleMode mode = OracleMode::First, std::uint64_t cap = kDefaultOracleCap) {
    inst.validate();
    return detail::Backtracker(inst, mode, cap).run();
}

inline bool oracle_satisfiable(const Instance& inst, std::uint64_t cap = kDefaultOracleCap) {
    return brute_force_solve(inst, OracleMode::First, cap).count > 0;
}

// All maps of the universe into itself that preserve every relation.
inline std::vector<std::vector<int>> enumerate_endomorphisms(const RelationalTemplate& s, std::uint64_t cap = 1'000'000) {
    s.validate();
    const int n = s.universe_size;
    std::uint64_t total = 1;
    for (int i = 0; i < n; ++i) {
        total *= static_cast<std::uint64_t>(n);
        if (total > cap) throw CapExceeded("endomorphism enumeration exceeds cap");
    }
    std::vector<std::vector<int>> out;
    std::vector<int> map(n, 0);
    for (;;) {
        if (is_homomorphism(map, s, s)) out.push_back(map);
        int i = n - 1;
        while (i >= 0 && ++map[i] == n) map[i--] = 0;
        if (i < 0) break;
    }
    return out;
}

// All sort-preserving endomorphisms of a binary instance, by enumerating
// every choice of h[x][a] in P_x.
inline std::vector<SortedMap> enumerate_endomorphisms(const BinaryInstance& g, std::uint64_t cap = 1'000'000) {
    const int n = g.num_variables(), u = g.universe_size();
    std::vector<std::pair<int, int>> slots;
    std::vector<std::vector<int>> doms(n);
    std::uint64_t total = 1;
    for (int x = 0; x < n; ++x) {
        doms[x] = g.domain(x);
        for (int a : doms[x]) {
            slots.emplace_back(x, a);
            total *= static_cast<std::uint64_t>(doms[x].size());
            if (total > cap) throw CapExceeded("endomorphism enumeration exceeds cap");
        }
    }
    std::vector<SortedMap> out;
    std::vector<std::size_t> pick(slots.size(), 0);
    SortedMap h(n, std::vector<int>(u, -1));
    for (;;) {
        for (std::size_t i = 0; i < slots.size(); ++i) h[slots[i].first][slots[i].second] = doms[slots[i].first][pick[i]];
        if (is_endomorphism(g, h)) out.push_back(h);
        int i = static_cast<int>(slots.size()) - 1;
        while (i >= 0 && ++pick[i] == doms[slots[i].first].size()) pick[i--] = 0;
        if (i < 0) break;
    }
    return out;
}

// True iff the operation table preserves every relation of the template.
inline bool preserves(const RelationalTemplate& t, const Operation& op) {
    const int n = t.universe_size;
    for (const auto& r : t.relations) {
        if (r.tuples.empty()) continue;
        std::vector<std::size_t> pick(op.arity, 0);
        Tuple image(r.arity);
        for (;;) {
            for (int j = 0; j < r.arity; ++j) {
                std::size_t idx = 0;
                for (int i = 0; i < op.arity; ++i) idx = idx * n + r.tuples[pick[i]][j];
                image[j] = op.table[idx];
            }
            if (!r.contains(image)) return false;
            int i = op.arity - 1;
            while (i >= 0 && ++pick[i] == r.tuples.size()) pick[i--] = 0;
            if (i < 0) break;
        }
    }
    return true;
}

// Every table of the given arity preserving all relations, optionally only
// the idempotent ones.
inline std::vector<Operation> enumerate_polymorphisms(const RelationalTemplate& t, int arity, bool idempotent_only = false,
                                                      std::uint64_t cap = 1'000'000) {
    t.validate();
    if (arity < 1) throw InvalidInput("arity must be positive");
    const int n = t.universe_size;
    std::size_t rows = 1;
    for (int i = 0; i < arity; ++i) rows *= n;
    // Idempotent tables have their diagonal rows fixed.
    std::vector<int> free_rows, diag(rows, -1);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t rest = r;
        int first = static_cast<int>(rest % n);
        bool same = true;
        for (int i = 0; i < arity; ++i) {
            same &= static_cast<int>(rest % n) == first;
            rest /= n;
        }
        if (idempotent_only && same) diag[r] = first;
        else free_rows.push_back(static_cast<int>(r));
    }
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < free_rows.size(); ++i) {
        total *= static_cast<std::uint64_t>(n);
        if (total > cap) throw CapExceeded("polymorphism enumeration exceeds cap");
    }
    std::vector<Operation> out;
    Operation op{"p", arity, std::vector<int>(rows, 0)};
    for (std::size_t r = 0; r < rows; ++r)
        if (diag[r] >= 0) op.table[r] = diag[r];
    std::vector<int> vals(free_rows.size(), 0);
    for (;;) {
        for (std::size_t i = 0; i < free_rows.size(); ++i) op.table[free_rows[i]] = vals[i];
        if (preserves(t, op)) out.push_back(op);
        int i = static_cast<int>(free_rows.size()) - 1;
        while (i >= 0 && ++vals[i] == n) vals[i--] = 0;
        if (i < 0) break;
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i].name = "p" + std::to_string(i);
    return out;
}

} // namespace mcsp
