#pragma once

// Two-variable equations x_j = s(x_i) + a over a finite abelian group, where
// s is a permutation of the group (the identity in the plain case), solved
// by union-find with permutation-valued potentials.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcsp/colour.hpp"

namespace mcsp {

struct Equation {
    int from = 0;
    int to = 0;
    int offset = 0;
    std::vector<int> twist;  // permutation applied to x_from before adding; empty means identity

    bool operator==(const Equation&) const = default;
};

struct LinearSystem {
    AbelianGroup group;
    int num_vars = 0;
    std::vector<Equation> equations;
    std::vector<std::pair<int, int>> pins;       // x_var = value
    std::vector<std::pair<int, int>> conflicts;  // pairs of variables joined by an empty constraint

    // x_j = x_i + a
    void add_equation(int i, int j, int a) { equations.push_back({i, j, a, {}}); }
    void pin(int var, int value) { pins.emplace_back(var, value); }

    void validate() const {
        auto check_var = [&](int v) {
            if (v < 0 || v >= num_vars) throw InvalidInput("equation names an unknown variable");
        };
        auto check_el = [&](int a) {
            if (a < 0 || a >= group.order) throw InvalidInput("offset is not a group element");
        };
        for (const auto& e : equations) {
            check_var(e.from);
            check_var(e.to);
            check_el(e.offset);
            if (!e.twist.empty()) {
                if (static_cast<int>(e.twist.size()) != group.order) throw InvalidInput("twist is not a permutation of the group");
                std::vector<int> s = e.twist;
                std::sort(s.begin(), s.end());
                for (int i = 0; i < group.order; ++i)
                    if (s[i] != i) throw InvalidInput("twist is not a permutation of the group");
            }
        }
        for (auto [v, a] : pins) {
            check_var(v);
            check_el(a);
        }
        for (auto [u, v] : conflicts) {
            check_var(u);
            check_var(v);
        }
    }
};

// Step along equation (or pin) `edge`: indices below equations.size() are
// equations, the rest are pins. Node num_vars stands for the constant zero
// that pins hang from.
struct WalkStep {
    int edge = 0;
    bool forward = true;

    bool operator==(const WalkStep&) const = default;
};

struct LinearCertificate {
    enum class Kind { Cycle, Conflict };
    Kind kind = Kind::Cycle;
    int base = 0;                                 // start and end of every walk
    std::vector<std::vector<WalkStep>> walks;     // jointly admit no value at `base`
    int offset = 0;                               // accumulated offset of the first walk from zero
    std::pair<int, int> conflict{-1, -1};
};

struct LinearResult {
    bool sat = false;
    std::vector<int> values;  // group element per variable when sat
    std::optional<LinearCertificate> certificate;
};

namespace detail {

using Perm = std::vector<int>;

inline Perm identity_perm(int n) {
    Perm p(n);
    std::iota(p.begin(), p.end(), 0);
    return p;
}
// (f ∘ g)(x) = f(g(x))
inline Perm compose(const Perm& f, const Perm& g) {
    Perm r(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) r[i] = f[g[i]];
    return r;
}
inline Perm inverse(const Perm& p) {
    Perm r(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) r[p[i]] = static_cast<int>(i);
    return r;
}

struct EdgeView {
    int from, to;
    Perm map;  // x_to = map(x_from)
};

inline std::vector<EdgeView> edge_views(const LinearSystem& s) {
    const int q = s.group.order;
    std::vector<EdgeView> out;
    for (const auto& e : s.equations) {
        Perm p(q);
        for (int x = 0; x < q; ++x) p[x] = s.group.add(e.twist.empty() ? x : e.twist[x], e.offset);
        out.push_back({e.from, e.to, std::move(p)});
    }
    for (auto [v, a] : s.pins) {
        Perm p(q);
        for (int x = 0; x < q; ++x) p[x] = s.group.add(x, a);
        out.push_back({s.num_vars, v, std::move(p)});
    }
    return out;
}

// Composite permutation of a walk, or nullopt if it is not a closed walk at base.
inline std::optional<Perm> walk_map(const std::vector<EdgeView>& edges, int base, const std::vector<WalkStep>& walk, int order) {
    Perm acc = identity_perm(order);
    int at = base;
    for (const auto& st : walk) {
        if (st.edge < 0 || st.edge >= static_cast<int>(edges.size())) return std::nullopt;
        const EdgeView& e = edges[st.edge];
        if (st.forward) {
            if (at != e.from) return std::nullopt;
            acc = compose(e.map, acc);
            at = e.to;
        } else {
            if (at != e.to) return std::nullopt;
            acc = compose(inverse(e.map), acc);
            at = e.from;
        }
    }
    if (at != base) return std::nullopt;
    return acc;
}

class PotentialSolver {
public:
    explicit PotentialSolver(const LinearSystem& s)
        : sys_(s), q_(s.group.order), nodes_(s.num_vars + 1), edges_(edge_views(s)) {
        parent_.resize(nodes_);
        std::iota(parent_.begin(), parent_.end(), 0);
        pot_.assign(nodes_, identity_perm(q_));
        size_.assign(nodes_, 1);
        allowed_.assign(nodes_, std::vector<char>(q_, 1));
        allowed_[ground()].assign(q_, 0);
        allowed_[ground()][s.group.zero] = 1;
        cycles_.assign(nodes_, {});
        tree_.assign(nodes_, {});
    }

    LinearResult run() {
        LinearResult res;
        if (!sys_.conflicts.empty()) {
            LinearCertificate c;
            c.kind = LinearCertificate::Kind::Conflict;
            c.conflict = sys_.conflicts.front();
            res.certificate = c;
            return res;
        }
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            if (!add(static_cast<int>(i))) {
                res.certificate = failure_;
                return res;
            }
        }
        res.sat = true;
        res.values.resize(sys_.num_vars);
        for (int v = 0; v < sys_.num_vars; ++v) {
            int r = find(v);
            int base = static_cast<int>(std::find(allowed_[r].begin(), allowed_[r].end(), 1) - allowed_[r].begin());
            res.values[v] = pot_[v][base];
        }
        return res;
    }

private:
    struct Cycle {
        int at;
        std::vector<WalkStep> walk;
    };

    int ground() const { return nodes_ - 1; }

    int find(int x) {
        if (parent_[x] == x) return x;
        int p = parent_[x];
        int r = find(p);
        pot_[x] = compose(pot_[x], pot_[p]);
        parent_[x] = r;
        return r;
    }

    // Path in the spanning forest from a to b, as walk steps.
    std::vector<WalkStep> tree_path(int a, int b) const {
        std::vector<int> prev(nodes_, -2);
        std::vector<WalkStep> via(nodes_);
        std::vector<int> queue{a};
        prev[a] = -1;
        for (std::size_t h = 0; h < queue.size(); ++h) {
            int u = queue[h];
            if (u == b) break;
            for (auto [w, st] : tree_[u])
                if (prev[w] == -2) {
                    prev[w] = u;
                    via[w] = st;
                    queue.push_back(w);
                }
        }
        std::vector<WalkStep> path;
        for (int u = b; u != a; u = prev[u]) path.push_back(via[u]);
        std::reverse(path.begin(), path.end());
        return path;
    }

    static std::vector<WalkStep> reversed(std::vector<WalkStep> w) {
        std::reverse(w.begin(), w.end());
        for (auto& s : w) s.forward = !s.forward;
        return w;
    }

    std::vector<WalkStep> rebase(const Cycle& c, int base) const {
        std::vector<WalkStep> p = tree_path(base, c.at);
        std::vector<WalkStep> w = p;
        w.insert(w.end(), c.walk.begin(), c.walk.end());
        auto back = reversed(p);
        w.insert(w.end(), back.begin(), back.end());
        // Drop immediate backtracking along the same edge.
        std::vector<WalkStep> out;
        for (const auto& st : w) {
            if (!out.empty() && out.back().edge == st.edge && out.back().forward != st.forward) out.pop_back();
            else out.push_back(st);
        }
        return out;
    }

    void fail(int root, int ground_member) {
        LinearCertificate cert;
        cert.kind = LinearCertificate::Kind::Cycle;
        cert.base = ground_member ? ground() : root;
        const auto& cs = cycles_[root];
        std::vector<std::vector<WalkStep>> walks;
        for (const auto& c : cs) walks.push_back(rebase(c, cert.base));
        // Prefer a single self-sufficient walk when one exists.
        for (const auto& w : walks) {
            auto m = walk_map(edges_, cert.base, w, q_);
            bool any = false;
            for (int g = 0; g < q_ && !any; ++g)
                any = (*m)[g] == g && (cert.base != ground() || g == sys_.group.zero);
            if (!any) {
                walks = {w};
                break;
            }
        }
        cert.walks = std::move(walks);
        if (!cert.walks.empty()) {
            auto m = walk_map(edges_, cert.base, cert.walks.front(), q_);
            cert.offset = sys_.group.sub((*m)[sys_.group.zero], sys_.group.zero);
        }
        failure_ = cert;
    }

    bool contains_ground(int root) { return find(ground()) == root; }

    bool add(int idx) {
        const EdgeView& e = edges_[idx];
        int ru = find(e.from), rv = find(e.to);
        const Perm& tu = pot_[e.from];
        const Perm& tv = pot_[e.to];
        if (ru == rv) {
            // tv(g) must equal map(tu(g)) for the root value g.
            bool shrank = false, any = false;
            for (int g = 0; g < q_; ++g) {
                if (!allowed_[ru][g]) continue;
                if (tv[g] != e.map[tu[g]]) {
                    allowed_[ru][g] = 0;
                    shrank = true;
                } else {
                    any = true;
                }
            }
            if (shrank) {
                std::vector<WalkStep> walk = tree_path(e.from, e.to);
                walk.push_back({idx, false});
                cycles_[ru].push_back({e.from, std::move(walk)});
            }
            if (!any) {
                fail(ru, contains_ground(ru));
                return false;
            }
            return true;
        }
        // x_rv = s(x_ru) with s = tv^-1 ∘ map ∘ tu.
        Perm s = compose(inverse(tv), compose(e.map, tu));
        int keep = ru, child = rv;
        Perm child_pot = s;
        if (size_[rv] > size_[ru]) {
            keep = rv;
            child = ru;
            child_pot = inverse(s);
        }
        bool any = false;
        for (int g = 0; g < q_; ++g) {
            if (allowed_[keep][g] && !allowed_[child][child_pot[g]]) allowed_[keep][g] = 0;
            any |= allowed_[keep][g] != 0;
        }
        parent_[child] = keep;
        pot_[child] = child_pot;
        size_[keep] += size_[child];
        tree_[e.from].push_back({e.to, WalkStep{idx, true}});
        tree_[e.to].push_back({e.from, WalkStep{idx, false}});
        for (auto& c : cycles_[child]) cycles_[keep].push_back(std::move(c));
        cycles_[child].clear();
        if (!any) {
            fail(keep, contains_ground(keep));
            return false;
        }
        return true;
    }

    const LinearSystem& sys_;
    int q_;
    int nodes_;
    std::vector<EdgeView> edges_;
    std::vector<int> parent_;
    std::vector<Perm> pot_;  // x_node = pot(x_parent)
    std::vector<int> size_;
    std::vector<std::vector<char>> allowed_;
    std::vector<std::vector<Cycle>> cycles_;
    std::vector<std::vector<std::pair<int, WalkStep>>> tree_;
    LinearCertificate failure_;
};

} // namespace detail

// Returns an assignment (one free value per component fixed to the least
// admissible element, zero when unconstrained) or a certificate.
inline LinearResult solve_linear_system(const LinearSystem& system) {
    system.validate();
    if (system.group.order <= 0) throw InvalidInput("linear system needs a non-empty group");
    LinearResult res = detail::PotentialSolver(system).run();
    if (res.sat) {
        const auto& g = system.group;
        for (const auto& e : system.equations) {
            int lhs = res.values[e.to];
            int rhs = g.add(e.twist.empty() ? res.values[e.from] : e.twist[res.values[e.from]], e.offset);
            if (lhs != rhs) throw InternalError("linear system solution failed re-verification");
        }
        for (auto [v, a] : system.pins)
            if (res.values[v] != a) throw InternalError("linear system solution failed re-verification");
    }
    return res;
}

// Independent check that a certificate refutes the system.
inline bool verify_certificate(const LinearSystem& system, const LinearCertificate& cert) {
    if (cert.kind == LinearCertificate::Kind::Conflict)
        return std::find(system.conflicts.begin(), system.conflicts.end(), cert.conflict) != system.conflicts.end();
    const int q = system.group.order;
    auto edges = detail::edge_views(system);
    std::vector<char> alive(q, 1);
    if (cert.base == system.num_vars) {
        std::fill(alive.begin(), alive.end(), 0);
        alive[system.group.zero] = 1;
    }
    if (cert.walks.empty()) return false;
    for (const auto& w : cert.walks) {
        auto m = detail::walk_map(edges, cert.base, w, q);
        if (!m) return false;
        for (int g = 0; g < q; ++g)
            if ((*m)[g] != g) alive[g] = 0;
    }
    return std::none_of(alive.begin(), alive.end(), [](char c) { return c != 0; });
}

// Offset accumulated around an untwisted closed walk: sum of forward offsets
// minus backward ones.
inline int walk_offset(const LinearSystem& system, const std::vector<WalkStep>& walk) {
    const auto& g = system.group;
    int acc = g.zero;
    for (const auto& st : walk) {
        const int ne = static_cast<int>(system.equations.size());
        int off = st.edge < ne ? system.equations[st.edge].offset : system.pins[st.edge - ne].second;
        acc = st.forward ? g.add(acc, off) : g.sub(acc, off);
    }
    return acc;
}

} // namespace mcsp
