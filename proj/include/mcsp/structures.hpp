#pragma once

// Relational templates, CSP instances, assignments and the binary
// (multiconsistency graph) form of an instance.
//
// Conventions: variables are stored 0-based and printed 1-based; values are
// 0-based integers below the universe size. Relations keep their tuples
// sorted and duplicate-free.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mcsp/error.hpp"

namespace mcsp {

using Tuple = std::vector<int>;

// Total assignment of values to variables; kUnassigned marks a hole.
using Assignment = std::vector<int>;
inline constexpr int kUnassigned = -1;

struct Relation {
    std::string name;
    int arity = 0;
    std::vector<Tuple> tuples;

    Relation() = default;
    Relation(std::string n, int k, std::vector<Tuple> ts) : name(std::move(n)), arity(k), tuples(std::move(ts)) {
        normalize();
    }

    void normalize() {
        std::sort(tuples.begin(), tuples.end());
        tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
    }

    bool contains(const Tuple& t) const { return std::binary_search(tuples.begin(), tuples.end(), t); }

    bool operator==(const Relation&) const = default;
};

inline void validate_relation(const Relation& r, int universe_size) {
    if (r.arity <= 0) throw InvalidInput("relation '" + r.name + "' has non-positive arity");
    for (std::size_t i = 0; i < r.tuples.size(); ++i) {
        const Tuple& t = r.tuples[i];
        if (static_cast<int>(t.size()) != r.arity)
            throw InvalidInput("relation '" + r.name + "' has a tuple of wrong length");
        for (int v : t)
            if (v < 0 || v >= universe_size)
                throw InvalidInput("relation '" + r.name + "' has entry " + std::to_string(v) + " outside the universe");
        if (i > 0 && !(r.tuples[i - 1] < t)) throw InvalidInput("relation '" + r.name + "' has duplicate or unsorted tuples");
    }
}

struct RelationalTemplate {
    int universe_size = 0;
    std::vector<Relation> relations;

    const Relation* find(const std::string& name) const {
        for (const auto& r : relations)
            if (r.name == name) return &r;
        return nullptr;
    }

    void validate() const {
        if (universe_size <= 0) throw InvalidInput("template universe must be non-empty");
        std::set<std::string> names;
        for (const auto& r : relations) {
            if (!names.insert(r.name).second) throw InvalidInput("duplicate relation name '" + r.name + "'");
            validate_relation(r, universe_size);
        }
    }

    bool operator==(const RelationalTemplate&) const = default;
};

struct Constraint {
    std::vector<int> scope;  // 0-based variables
    int relation = 0;        // index into Instance::relations

    bool operator==(const Constraint&) const = default;
};

struct Instance {
    int universe_size = 0;
    int num_variables = 0;
    std::vector<std::vector<int>> domains;  // sorted, per variable
    std::vector<Relation> relations;        // template relations followed by inline ones
    std::vector<Constraint> constraints;
    std::vector<std::string> variable_names;  // optional labels, empty when unnamed

    Instance() = default;
    Instance(int universe, int variables) : universe_size(universe), num_variables(variables) {
        std::vector<int> all(universe);
        for (int v = 0; v < universe; ++v) all[v] = v;
        domains.assign(variables, all);
        variable_names.assign(variables, "");
    }

    static Instance over(const RelationalTemplate& tmpl, int variables) {
        Instance inst(tmpl.universe_size, variables);
        inst.relations = tmpl.relations;
        return inst;
    }

    int relation_index(const std::string& name) const {
        for (std::size_t i = 0; i < relations.size(); ++i)
            if (relations[i].name == name) return static_cast<int>(i);
        return -1;
    }

    int add_relation(Relation r) {
        relations.push_back(std::move(r));
        return static_cast<int>(relations.size()) - 1;
    }

    void add_constraint(std::vector<int> scope, int relation) { constraints.push_back({std::move(scope), relation}); }

    void add_constraint(std::vector<int> scope, Relation inline_relation) {
        if (inline_relation.name.empty()) inline_relation.name = "_inline" + std::to_string(relations.size());
        int idx = add_relation(std::move(inline_relation));
        add_constraint(std::move(scope), idx);
    }

    int max_arity() const {
        int p = 0;
        for (const auto& c : constraints) p = std::max(p, static_cast<int>(c.scope.size()));
        return p;
    }

    void validate() const {
        if (universe_size <= 0) throw InvalidInput("instance universe must be non-empty");
        if (num_variables <= 0) throw InvalidInput("instance needs at least one variable");
        if (static_cast<int>(domains.size()) != num_variables) throw InvalidInput("one domain per variable required");
        for (int x = 0; x < num_variables; ++x) {
            const auto& d = domains[x];
            if (d.empty()) throw InvalidInput("domain of variable " + std::to_string(x + 1) + " is empty");
            for (std::size_t i = 0; i < d.size(); ++i) {
                if (d[i] < 0 || d[i] >= universe_size)
                    throw InvalidInput("domain of variable " + std::to_string(x + 1) + " leaves the universe");
                if (i > 0 && d[i - 1] >= d[i])
                    throw InvalidInput("domain of variable " + std::to_string(x + 1) + " is not sorted and duplicate-free");
            }
        }
        for (const auto& r : relations) validate_relation(r, universe_size);
        for (const auto& c : constraints) {
            if (c.relation < 0 || c.relation >= static_cast<int>(relations.size()))
                throw InvalidInput("constraint references an unknown relation");
            if (static_cast<int>(c.scope.size()) != relations[c.relation].arity)
                throw InvalidInput("scope length differs from arity of '" + relations[c.relation].name + "'");
            for (int x : c.scope)
                if (x < 0 || x >= num_variables) throw InvalidInput("constraint scope names an unknown variable");
        }
    }

    bool operator==(const Instance&) const = default;
};

// True iff every value lies in its domain and every constraint holds.
inline bool evaluate_assignment(const Instance& inst, const Assignment& f) {
    if (static_cast<int>(f.size()) != inst.num_variables) throw InvalidInput("partial assignment");
    for (int v : f)
        if (v == kUnassigned) throw InvalidInput("partial assignment");
    for (int x = 0; x < inst.num_variables; ++x)
        if (!std::binary_search(inst.domains[x].begin(), inst.domains[x].end(), f[x])) return false;
    Tuple image;
    for (const auto& c : inst.constraints) {
        image.clear();
        for (int x : c.scope) image.push_back(f[x]);
        if (!inst.relations[c.relation].contains(image)) return false;
    }
    return true;
}

// Checks that `map` (indexed by source element) sends every tuple of every
// source relation into the target relation of the same name.
inline bool is_homomorphism(const std::vector<int>& map, const RelationalTemplate& source, const RelationalTemplate& target) {
    if (source.relations.size() != target.relations.size()) throw InvalidInput("signature mismatch");
    for (const auto& r : source.relations) {
        const Relation* t = target.find(r.name);
        if (!t || t->arity != r.arity) throw InvalidInput("signature mismatch on relation '" + r.name + "'");
    }
    if (static_cast<int>(map.size()) != source.universe_size) throw InvalidInput("map is not total on the source universe");
    for (int v : map)
        if (v < 0 || v >= target.universe_size) throw InvalidInput("map leaves the target universe");
    Tuple image;
    for (const auto& r : source.relations) {
        const Relation& t = *target.find(r.name);
        for (const auto& tup : r.tuples) {
            image.clear();
            for (int a : tup) image.push_back(map[a]);
            if (!t.contains(image)) return false;
        }
    }
    return true;
}

// Syntactically simple binary instance: one constraint E[x][y] for every
// ordered pair of variables, stored as a dense bit table over the universe.
class BinaryInstance {
public:
    static constexpr std::size_t kMaxCells = std::size_t{1} << 28;

    BinaryInstance() = default;
    BinaryInstance(int num_variables, int universe_size) : n_(num_variables), u_(universe_size) {
        if (n_ <= 0 || u_ <= 0) throw InvalidInput("binary instance needs variables and a universe");
        std::size_t cells = static_cast<std::size_t>(n_) * n_ * u_ * u_;
        if (cells > kMaxCells) throw CapExceeded("binary instance too large (" + std::to_string(cells) + " cells)");
        dom_.assign(static_cast<std::size_t>(n_) * u_, 0);
        rel_.assign(cells, 0);
    }

    int num_variables() const { return n_; }
    int universe_size() const { return u_; }

    bool in_domain(int x, int a) const { return dom_[static_cast<std::size_t>(x) * u_ + a] != 0; }
    void set_in_domain(int x, int a, bool on) { dom_[static_cast<std::size_t>(x) * u_ + a] = on; }

    std::vector<int> domain(int x) const {
        std::vector<int> d;
        for (int a = 0; a < u_; ++a)
            if (in_domain(x, a)) d.push_back(a);
        return d;
    }
    int domain_size(int x) const {
        int s = 0;
        for (int a = 0; a < u_; ++a) s += in_domain(x, a);
        return s;
    }
    int total_domain_size() const {
        int s = 0;
        for (char c : dom_) s += c;
        return s;
    }

    bool allows(int x, int y, int a, int b) const { return rel_[cell(x, y, a, b)] != 0; }
    // Writes one direction only; use set_pair to keep the symmetry condition.
    void set_raw(int x, int y, int a, int b, bool on) { rel_[cell(x, y, a, b)] = on; }
    void set_pair(int x, int y, int a, int b, bool on) {
        set_raw(x, y, a, b, on);
        set_raw(y, x, b, a, on);
    }

    std::vector<std::pair<int, int>> pairs(int x, int y) const {
        std::vector<std::pair<int, int>> out;
        for (int a = 0; a < u_; ++a)
            for (int b = 0; b < u_; ++b)
                if (allows(x, y, a, b)) out.emplace_back(a, b);
        return out;
    }

    // Sets every E[x][x] to the diagonal of P_x.
    void reset_diagonals() {
        for (int x = 0; x < n_; ++x)
            for (int a = 0; a < u_; ++a)
                for (int b = 0; b < u_; ++b) set_raw(x, x, a, b, a == b && in_domain(x, a));
    }

    // Drops every constraint pair that leaves the current domains.
    void restrict_to_domains() {
        for (int x = 0; x < n_; ++x)
            for (int y = 0; y < n_; ++y)
                for (int a = 0; a < u_; ++a)
                    for (int b = 0; b < u_; ++b)
                        if (allows(x, y, a, b) && (!in_domain(x, a) || !in_domain(y, b))) set_raw(x, y, a, b, false);
    }

    // Restricts P_x to `keep` and prunes incident pairs.
    void restrict_domain(int x, const std::vector<int>& keep) {
        std::vector<char> on(u_, 0);
        for (int a : keep) on[a] = 1;
        for (int a = 0; a < u_; ++a)
            if (in_domain(x, a) && !on[a]) remove_value(x, a);
    }

    void remove_value(int x, int a) {
        set_in_domain(x, a, false);
        for (int y = 0; y < n_; ++y)
            for (int b = 0; b < u_; ++b) {
                set_raw(x, y, a, b, false);
                set_raw(y, x, b, a, false);
            }
    }

    bool operator==(const BinaryInstance&) const = default;

private:
    std::size_t cell(int x, int y, int a, int b) const {
        return ((static_cast<std::size_t>(x) * n_ + y) * u_ + a) * u_ + b;
    }

    int n_ = 0;
    int u_ = 0;
    std::vector<char> dom_;
    std::vector<char> rel_;
};

// Report of violated syntactic-simplicity conditions; empty when all hold.
// Variables are reported 1-based.
inline std::vector<std::string> check_syntactic_simplicity(const BinaryInstance& g) {
    std::vector<std::string> report;
    const int n = g.num_variables(), u = g.universe_size();
    for (int x = 0; x < n; ++x) {
        bool ok = true;
        for (int a = 0; a < u && ok; ++a)
            for (int b = 0; b < u && ok; ++b)
                if (g.allows(x, x, a, b) != (a == b && g.in_domain(x, a))) ok = false;
        if (!ok) report.push_back("diagonal violated at " + std::to_string(x + 1));
    }
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y) {
            bool sym = true, inside = true;
            for (int a = 0; a < u; ++a)
                for (int b = 0; b < u; ++b) {
                    if (g.allows(x, y, a, b) != g.allows(y, x, b, a)) sym = false;
                    if (g.allows(x, y, a, b) && (!g.in_domain(x, a) || !g.in_domain(y, b))) inside = false;
                    if (g.allows(y, x, b, a) && (!g.in_domain(x, a) || !g.in_domain(y, b))) inside = false;
                }
            std::string at = "(" + std::to_string(x + 1) + "," + std::to_string(y + 1) + ")";
            if (!sym) report.push_back("symmetry violated at " + at);
            if (!inside) report.push_back("constraint leaves domains at " + at);
        }
    return report;
}

// Sort-preserving map on a binary instance: map[x][a] for a in P_x, -1 elsewhere.
using SortedMap = std::vector<std::vector<int>>;

inline bool is_endomorphism(const BinaryInstance& g, const SortedMap& h) {
    const int n = g.num_variables(), u = g.universe_size();
    if (static_cast<int>(h.size()) != n) return false;
    for (int x = 0; x < n; ++x) {
        if (static_cast<int>(h[x].size()) != u) return false;
        for (int a = 0; a < u; ++a)
            if (g.in_domain(x, a) && (h[x][a] < 0 || h[x][a] >= u || !g.in_domain(x, h[x][a]))) return false;
    }
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int a = 0; a < u; ++a)
                for (int b = 0; b < u; ++b)
                    if (g.allows(x, y, a, b) && !g.allows(x, y, h[x][a], h[y][b])) return false;
    return true;
}

struct CoreReport {
    bool is_core = true;
    std::optional<SortedMap> witness;  // non-surjective endomorphism when !is_core
};

namespace detail {

class CoreSearch {
public:
    CoreSearch(const BinaryInstance& g) : g_(g), n_(g.num_variables()), u_(g.universe_size()) {
        for (int x = 0; x < n_; ++x)
            for (int a : g.domain(x)) slots_.emplace_back(x, a);
        map_.assign(n_, std::vector<int>(u_, -1));
    }

    std::optional<SortedMap> find_non_surjective() {
        if (extend(0)) return map_;
        return std::nullopt;
    }

private:
    bool consistent(int x, int a) const {
        const int img = map_[x][a];
        for (int y = 0; y < n_; ++y)
            for (int b = 0; b < u_; ++b) {
                if (map_[y][b] < 0) continue;
                if (g_.allows(x, y, a, b) && !g_.allows(x, y, img, map_[y][b])) return false;
            }
        return true;
    }

    bool surjective() const {
        for (int x = 0; x < n_; ++x) {
            std::vector<char> hit(u_, 0);
            for (int a = 0; a < u_; ++a)
                if (map_[x][a] >= 0) hit[map_[x][a]] = 1;
            for (int a = 0; a < u_; ++a)
                if (g_.in_domain(x, a) && !hit[a]) return false;
        }
        return true;
    }

    bool extend(std::size_t k) {
        if (k == slots_.size()) return !surjective();
        auto [x, a] = slots_[k];
        for (int b = 0; b < u_; ++b) {
            if (!g_.in_domain(x, b)) continue;
            map_[x][a] = b;
            if (consistent(x, a) && extend(k + 1)) return true;
        }
        map_[x][a] = -1;
        return false;
    }

    const BinaryInstance& g_;
    int n_, u_;
    std::vector<std::pair<int, int>> slots_;
    SortedMap map_;
};

} // namespace detail

// Exact core test by exhaustive endomorphism search. Sorts are preserved:
// every P_x maps into itself.
inline CoreReport is_core(const BinaryInstance& g, int cap = 12) {
    if (g.total_domain_size() > cap) throw CapExceeded("core check infeasible; pass --assume-core");
    CoreReport rep;
    rep.witness = detail::CoreSearch(g).find_non_surjective();
    rep.is_core = !rep.witness.has_value();
    return rep;
}

// Instance view of a binary instance: explicit domains plus one inline
// constraint for each pair x<y whose relation is not the full product.
inline Instance to_instance(const BinaryInstance& g, const std::vector<std::string>& names = {}) {
    const int n = g.num_variables(), u = g.universe_size();
    Instance inst(u, n);
    for (int x = 0; x < n; ++x) inst.domains[x] = g.domain(x);
    if (!names.empty()) inst.variable_names = names;
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y) {
            auto ps = g.pairs(x, y);
            if (ps.size() == inst.domains[x].size() * inst.domains[y].size()) continue;
            std::vector<Tuple> ts;
            for (auto [a, b] : ps) ts.push_back({a, b});
            inst.add_constraint({x, y}, Relation("E_" + std::to_string(x + 1) + "_" + std::to_string(y + 1), 2, std::move(ts)));
        }
    return inst;
}

} // namespace mcsp
