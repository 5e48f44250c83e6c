#pragma once

// Type reduction on the coloured graph. Yellow endpoints are dropped; red
// edges are oriented and each domain keeps its singleton maxima, after a
// shrink when there are several.

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mcsp/colour.hpp"
#include "mcsp/propagate.hpp"

namespace mcsp {

// One algebra shared by all domains, or one per variable.
class DomainAlgebras {
public:
    DomainAlgebras(std::vector<FiniteAlgebra> algebras, int num_variables, int depth = kDefaultTermDepth,
                   int congruence_cap = kDefaultCongruenceCap)
        : algebras_(std::move(algebras)), n_(num_variables) {
        if (algebras_.empty()) throw InvalidInput("at least one algebra is required");
        if (algebras_.size() != 1 && static_cast<int>(algebras_.size()) != n_)
            throw InvalidInput("supply one algebra, or one per variable");
        for (const auto& a : algebras_) caches_.push_back(std::make_unique<ColourCache>(a, depth, congruence_cap));
    }

    int num_variables() const { return n_; }
    const FiniteAlgebra& of(int x) const { return algebras_[algebras_.size() == 1 ? 0 : x]; }
    const EdgeColour& colour(int x, int a, int b) { return caches_[algebras_.size() == 1 ? 0 : x]->get(a, b); }

private:
    std::vector<FiniteAlgebra> algebras_;
    std::vector<std::unique_ptr<ColourCache>> caches_;
    int n_;
};

struct ReductionStep {
    BinaryInstance graph;
    std::vector<Removal> removed;
    bool changed() const { return !removed.empty(); }
};

// Removes both θ-blocks of every yellow edge inside each domain. All yellow
// edges are found on the incoming domains before anything is removed.
inline ReductionStep eliminate_yellow(const BinaryInstance& g, DomainAlgebras& algs) {
    ReductionStep step{g, {}};
    for (int x = 0; x < g.num_variables(); ++x) {
        auto dom = g.domain(x);
        std::set<int> doomed;
        for (std::size_t i = 0; i < dom.size(); ++i)
            for (std::size_t j = i + 1; j < dom.size(); ++j) {
                const EdgeColour& e = algs.colour(x, dom[i], dom[j]);
                if (e.colour != Colour::Yellow) continue;
                for (int end : {dom[i], dom[j]}) {
                    int blk = e.witness_congruence.block_of(end);
                    for (int v : e.witness_congruence.blocks[blk])
                        if (g.in_domain(x, v)) doomed.insert(v);
                }
            }
        for (int v : doomed) {
            step.graph.remove_value(x, v);
            step.removed.push_back({x, v, -1, "yellow"});
        }
    }
    return step;
}

struct RedOrientation {
    std::vector<int> domain;
    std::vector<std::pair<int, int>> edges;   // a -> b: f(a,b) = f(b,a) = b
    std::vector<std::vector<int>> components;  // strong components, members sorted
    std::vector<int> maximal;                  // indices of components without incoming edges

    // Elements forming maximal components of size one.
    std::vector<int> singleton_maxima() const {
        std::vector<int> out;
        for (int c : maximal)
            if (components[c].size() == 1) out.push_back(components[c].front());
        std::sort(out.begin(), out.end());
        return out;
    }
};

namespace detail {

inline std::vector<std::vector<int>> strong_components(int n, const std::vector<std::vector<int>>& adj) {
    std::vector<int> index(n, -1), low(n, 0), stack;
    std::vector<char> on(n, 0);
    std::vector<std::vector<int>> comps;
    int counter = 0;
    std::function<void(int)> visit = [&](int v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on[v] = 1;
        for (int w : adj[v]) {
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<int> comp;
            int w;
            do {
                w = stack.back();
                stack.pop_back();
                on[w] = 0;
                comp.push_back(w);
            } while (w != v);
            comps.push_back(std::move(comp));
        }
    };
    for (int v = 0; v < n; ++v)
        if (index[v] < 0) visit(v);
    return comps;
}

} // namespace detail

// Orients the pairs of `domain` under the binary operation named by `f`
// after checking f(x,x) = x and f(x,f(x,y)) = f(f(x,y),x) = f(x,y) there,
// and commutativity on the supplied red pairs.
inline RedOrientation orient_red(const FiniteAlgebra& alg, int f, std::vector<int> domain,
                                 const std::vector<std::pair<int, int>>& red_pairs = {}) {
    if (f < 0 || f >= static_cast<int>(alg.operations.size()) || alg.operations[f].arity != 2)
        throw InvalidInput("invalid Bulatov operation: not a binary operation");
    std::sort(domain.begin(), domain.end());
    auto ap = [&](int x, int y) { return alg.apply(f, {x, y}); };
    for (int x : domain) {
        if (ap(x, x) != x) throw InvalidInput("invalid Bulatov operation: not idempotent at " + std::to_string(x));
        for (int y : domain) {
            int xy = ap(x, y);
            if (ap(x, xy) != xy || ap(xy, x) != xy)
                throw InvalidInput("invalid Bulatov operation: identities fail at (" + std::to_string(x) + "," + std::to_string(y) + ")");
        }
    }
    for (auto [a, b] : red_pairs)
        if (ap(a, b) != ap(b, a))
            throw InvalidInput("invalid Bulatov operation: not commutative on red pair (" + std::to_string(a) + "," + std::to_string(b) + ")");

    RedOrientation o;
    o.domain = domain;
    const int n = static_cast<int>(domain.size());
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            int a = domain[i], b = domain[j];
            if (ap(a, b) == b && ap(b, a) == b) {
                o.edges.emplace_back(a, b);
                adj[i].push_back(j);
            }
        }
    auto comps = detail::strong_components(n, adj);
    std::vector<int> comp_of(n);
    for (auto& c : comps) std::sort(c.begin(), c.end());
    std::sort(comps.begin(), comps.end());
    for (std::size_t c = 0; c < comps.size(); ++c)
        for (int i : comps[c]) comp_of[i] = static_cast<int>(c);
    std::vector<char> has_in(comps.size(), 0);
    for (int i = 0; i < n; ++i)
        for (int j : adj[i])
            if (comp_of[i] != comp_of[j]) has_in[comp_of[j]] = 1;
    for (auto& c : comps) {
        std::vector<int> vals;
        for (int i : c) vals.push_back(domain[i]);
        o.components.push_back(std::move(vals));
    }
    for (std::size_t c = 0; c < comps.size(); ++c)
        if (!has_in[c]) o.maximal.push_back(static_cast<int>(c));
    return o;
}

// Keeps exactly the singleton maxima of each oriented domain.
inline ReductionStep prune_red(const BinaryInstance& g, const std::vector<std::optional<RedOrientation>>& orientations) {
    ReductionStep step{g, {}};
    for (int x = 0; x < g.num_variables() && x < static_cast<int>(orientations.size()); ++x) {
        if (!orientations[x]) continue;
        auto keep = orientations[x]->singleton_maxima();
        for (int v : g.domain(x))
            if (!std::binary_search(keep.begin(), keep.end(), v)) {
                step.graph.remove_value(x, v);
                step.removed.push_back({x, v, -1, "red"});
            }
    }
    return step;
}

// Replaces P_x by the image of an idempotent power of p(y) = f(c, y) and maps
// every constraint at x through it.
inline ReductionStep shrink_non_permutation(const BinaryInstance& g, int x, const FiniteAlgebra& alg, int f, int c) {
    auto dom = g.domain(x);
    if (!std::binary_search(dom.begin(), dom.end(), c)) throw InvalidInput("shrink element outside the domain");
    const int u = g.universe_size();
    std::vector<int> p(u, -1);
    for (int y : dom) {
        p[y] = alg.apply(f, {c, y});
        if (!g.in_domain(x, p[y])) throw InvalidInput("shrink map leaves the domain");
    }
    std::set<int> image;
    for (int y : dom) image.insert(p[y]);
    if (image.size() == dom.size()) throw InvalidInput("shrink inapplicable: p is a permutation of the domain");
    std::vector<int> r = p;
    for (int guard = 0;; ++guard) {
        bool idem = true;
        for (int y : dom) idem &= r[r[y]] == r[y];
        if (idem) break;
        if (guard > 100000) throw InternalError("shrink iteration did not stabilise");
        std::vector<int> next(u, -1);
        for (int y : dom) next[y] = p[r[y]];
        r = std::move(next);
    }
    ReductionStep step{g, {}};
    BinaryInstance& h = step.graph;
    std::vector<char> keep(u, 0);
    for (int y : dom) keep[r[y]] = 1;
    for (int y = 0; y < g.num_variables(); ++y) {
        if (y == x) continue;
        for (int a : dom)
            for (int b = 0; b < u; ++b) h.set_pair(x, y, a, b, false);
        for (int a : dom)
            for (int b = 0; b < u; ++b)
                if (g.allows(x, y, a, b)) h.set_pair(x, y, r[a], b, true);
    }
    for (int a : dom)
        if (!keep[a]) {
            h.set_in_domain(x, a, false);
            step.removed.push_back({x, a, -1, "shrink"});
        }
    h.reset_diagonals();
    return step;
}

struct PassStats {
    int propagated = 0;
    int yellow = 0;
    int red = 0;
    int shrink = 0;
};

struct TypeReduceResult {
    BinaryInstance graph;
    bool unsat = false;
    std::vector<Removal> log;
    std::vector<PassStats> passes;
};

namespace detail {

inline bool any_empty(const BinaryInstance& g) {
    for (int x = 0; x < g.num_variables(); ++x)
        if (g.domain_size(x) == 0) return true;
    return false;
}

// Red stage on one pass: orient domains carrying red pairs, then prune or
// shrink. Returns the removals made.
inline std::vector<Removal> red_stage(BinaryInstance& g, DomainAlgebras& algs, PassStats& st) {
    std::vector<Removal> out;
    std::vector<std::optional<RedOrientation>> orient(g.num_variables());
    bool any = false;
    for (int x = 0; x < g.num_variables(); ++x) {
        auto dom = g.domain(x);
        std::vector<std::pair<int, int>> red;
        for (std::size_t i = 0; i < dom.size(); ++i)
            for (std::size_t j = i + 1; j < dom.size(); ++j)
                if (algs.colour(x, dom[i], dom[j]).colour == Colour::Red) red.emplace_back(dom[i], dom[j]);
        if (red.empty()) continue;
        const FiniteAlgebra& alg = algs.of(x);
        if (alg.redop.empty()) throw InvalidInput("red edges present but the algebra names no red-edge operation (flag redop)");
        const int f = alg.find_operation(alg.redop);
        RedOrientation o = orient_red(alg, f, dom, red);
        auto maxima = o.singleton_maxima();
        if (maxima.size() >= 2) {
            ReductionStep s = shrink_non_permutation(g, x, alg, f, maxima.front());
            g = std::move(s.graph);
            st.shrink += static_cast<int>(s.removed.size());
            out.insert(out.end(), s.removed.begin(), s.removed.end());
        } else {
            orient[x] = std::move(o);
            any = true;
        }
    }
    if (any) {
        ReductionStep s = prune_red(g, orient);
        g = std::move(s.graph);
        st.red += static_cast<int>(s.removed.size());
        out.insert(out.end(), s.removed.begin(), s.removed.end());
    }
    return out;
}

} // namespace detail

// Loops propagate -> yellow -> red/shrink, restarting from propagation after
// any stage that removes something, until nothing changes or a domain empties.
inline TypeReduceResult type_reduce(const BinaryInstance& graph, DomainAlgebras& algs) {
    TypeReduceResult res;
    res.graph = graph;
    const int bound = graph.total_domain_size() + 2;
    for (int pass = 0; pass <= bound; ++pass) {
        PassStats st;
        PropagationResult pr = run_12_consistency(res.graph);
        res.graph = std::move(pr.reduced);
        st.propagated = static_cast<int>(pr.removal_log.size());
        res.log.insert(res.log.end(), pr.removal_log.begin(), pr.removal_log.end());
        if (pr.status == PropagationStatus::Empty) {
            res.passes.push_back(st);
            res.unsat = true;
            return res;
        }
        ReductionStep ys = eliminate_yellow(res.graph, algs);
        st.yellow = static_cast<int>(ys.removed.size());
        res.graph = std::move(ys.graph);
        res.log.insert(res.log.end(), ys.removed.begin(), ys.removed.end());
        if (!ys.changed()) {
            auto rs = detail::red_stage(res.graph, algs, st);
            res.log.insert(res.log.end(), rs.begin(), rs.end());
        }
        res.passes.push_back(st);
        if (detail::any_empty(res.graph)) {
            res.unsat = true;
            return res;
        }
        if (st.yellow == 0 && st.red == 0 && st.shrink == 0) return res;
    }
    throw InternalError("type reduction did not terminate");
}

// Reason chain for a removed value: each support removal is explained by
// the earlier removals of every value that used to support it.
inline std::vector<std::string> explain_removal(const BinaryInstance& original, const std::vector<Removal>& log, int var, int value,
                                                int max_lines = 200) {
    std::vector<std::string> lines;
    std::set<std::pair<int, int>> done;
    auto find = [&](int x, int a) -> const Removal* {
        for (const auto& r : log)
            if (r.var == x && r.value == a) return &r;
        return nullptr;
    };
    std::function<void(int, int, int)> go = [&](int x, int a, int indent) {
        if (static_cast<int>(lines.size()) >= max_lines || !done.insert({x, a}).second) return;
        const Removal* r = find(x, a);
        std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
        std::string head = pad + "var " + std::to_string(x + 1) + " value " + std::to_string(a) + ": ";
        if (!r) {
            lines.push_back(head + (original.in_domain(x, a) ? "not removed" : "not in the initial domain"));
            return;
        }
        if (r->reason != "support") {
            lines.push_back(head + "removed by " + r->reason + " rule");
            return;
        }
        lines.push_back(head + "no support towards var " + std::to_string(r->neighbor + 1));
        for (int b = 0; b < original.universe_size(); ++b)
            if (original.allows(x, r->neighbor, a, b)) go(r->neighbor, b, indent + 1);
    };
    go(var, value, 0);
    return lines;
}

} // namespace mcsp
