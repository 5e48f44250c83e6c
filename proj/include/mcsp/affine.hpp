#pragma once

// Affine stage. Constraints between simple affine domains are classified,
// domains linked by isomorphisms are grouped, and each group becomes a
// system of two-variable linear equations used by the per-point checks and
// the block-descent solver.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mcsp/binarize.hpp"
#include "mcsp/linear_system.hpp"
#include "mcsp/reduce.hpp"

namespace mcsp {

// ------------------------------------------------------- classification

enum class LinkKind { FullProduct, IsoGraph };

struct ConstraintClass {
    LinkKind kind = LinkKind::FullProduct;
    Congruence theta;      // on the left factor; meaningful for IsoGraph
    std::vector<int> iso;  // iso[i]: right element matched with theta.blocks[i]
};

namespace detail {

inline std::optional<ConstraintClass> classify(const std::vector<std::pair<int, int>>& c, std::vector<int> left, std::vector<int> right) {
    std::sort(left.begin(), left.end());
    std::sort(right.begin(), right.end());
    std::set<std::pair<int, int>> s(c.begin(), c.end());
    ConstraintClass out;
    if (s.size() == left.size() * right.size()) {
        bool full = true;
        for (int a : left)
            for (int b : right) full &= s.count({a, b}) > 0;
        if (full) {
            out.kind = LinkKind::FullProduct;
            out.theta.carrier = left;
            out.theta.blocks = {left};
            out.iso = {};
            return out;
        }
    }
    // a ~ a' iff they share a partner b (closed transitively).
    std::map<int, int> pos;
    for (std::size_t i = 0; i < left.size(); ++i) pos[left[i]] = static_cast<int>(i);
    UnionFind uf(static_cast<int>(left.size()));
    std::map<int, int> first_with;
    for (auto [a, b] : s) {
        if (!pos.count(a)) return std::nullopt;
        auto it = first_with.find(b);
        if (it == first_with.end()) first_with[b] = a;
        else uf.unite(pos[a], pos[it->second]);
    }
    Congruence theta = to_congruence(uf.labels(), left);
    std::vector<int> iso;
    std::set<int> used;
    for (const auto& blk : theta.blocks) {
        std::set<int> partners;
        for (auto [a, b] : s)
            if (std::binary_search(blk.begin(), blk.end(), a)) partners.insert(b);
        if (partners.size() != 1) return std::nullopt;
        int b = *partners.begin();
        if (!used.insert(b).second) return std::nullopt;
        iso.push_back(b);
    }
    if (used != std::set<int>(right.begin(), right.end())) return std::nullopt;
    // Exact reconstruction: C is the graph of the block map.
    std::set<std::pair<int, int>> graph;
    for (std::size_t i = 0; i < theta.blocks.size(); ++i)
        for (int a : theta.blocks[i]) graph.insert({a, iso[i]});
    if (graph != s) return std::nullopt;
    out.kind = LinkKind::IsoGraph;
    out.theta = std::move(theta);
    out.iso = std::move(iso);
    return out;
}

} // namespace detail

// FullProduct if c = left x right; otherwise the graph of a bijection from
// the blocks of the "shares a right partner" congruence onto `right`.
inline ConstraintClass classify_constraint(const std::vector<std::pair<int, int>>& c, const std::vector<int>& left,
                                           const std::vector<int>& right) {
    auto r = detail::classify(c, left, right);
    if (!r) throw InvalidInput("link dichotomy violated");
    return *r;
}

// ----------------------------------------------------------- groups

struct GroupMember {
    int var = 0;
    int parent = -1;            // member index it was reached from, -1 for the anchor
    std::vector<int> support;   // S_v, sorted
    std::vector<int> label;     // value -> element of the anchor quotient, -1 outside S_v
    std::vector<int> coord;     // value -> group coordinate relative to the member's zero
    int zero_value = 0;         // element of S_v with coordinate zero
};

struct DomainGroup {
    int anchor = 0;
    std::vector<int> anchor_set;
    Congruence theta;
    AbelianGroup group;  // on the blocks of theta, indexed by block
    std::optional<Term> maltsev;
    std::vector<GroupMember> members;  // anchor first, then discovery order
    std::vector<int> member_of;        // variable -> member index or -1

    const GroupMember& member(int var) const { return members.at(member_of.at(var)); }
};

struct AffineOptions {
    int depth = kDefaultTermDepth;
    int congruence_cap = kDefaultCongruenceCap;
    std::size_t subuniverse_cap = 4096;
    std::mt19937_64* zero_rng = nullptr;  // random zero choices when set
};

namespace detail {

// Group structure on C/theta, memoised by quotient tables.
struct QuotientGroup {
    AbelianGroup group;
    std::optional<Term> maltsev;
};

inline QuotientGroup quotient_group(const FiniteAlgebra& alg, const std::vector<int>& c, const Congruence& theta,
                                    const AffineOptions& opts, int zero_block) {
    Subalgebra sub = subalgebra(alg, c);
    Congruence local;
    local.carrier.resize(sub.elements.size());
    std::iota(local.carrier.begin(), local.carrier.end(), 0);
    for (const auto& blk : theta.blocks) {
        std::vector<int> l;
        for (int v : blk) l.push_back(sub.local(v));
        std::sort(l.begin(), l.end());
        local.blocks.push_back(std::move(l));
    }
    std::sort(local.blocks.begin(), local.blocks.end());
    FiniteAlgebra q = quotient(sub.algebra, local);
    QuotientGroup out;
    if (q.size == 1) {
        out.group = AbelianGroup::cyclic(1);
        return out;
    }
    static std::mutex mu;
    static std::map<std::string, std::optional<Term>> memo;
    const std::string key = quotient_key(q, 0, 0, opts.depth);
    std::optional<Term> m;
    bool cached = false;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = memo.find(key);
        if (it != memo.end()) {
            m = it->second;
            cached = true;
        }
    }
    if (!cached) {
        m = find_maltsev_term(q, 1);
        if (!m && opts.depth > 1) m = find_maltsev_term(q, opts.depth);
        std::lock_guard<std::mutex> lock(mu);
        memo.emplace(key, m);
    }
    if (!m) throw InvalidInput("affine witness fails on the anchor quotient: no Maltsev term");
    std::vector<int> all(q.size);
    std::iota(all.begin(), all.end(), 0);
    AffineWitness w = verify_affine_witness(q, all, *m, zero_block);
    if (!w.ok) throw InvalidInput("affine witness fails on the anchor quotient: " + w.reason);
    out.group = w.group;
    out.maltsev = m;
    return out;
}

inline int pick(const std::vector<int>& set, std::mt19937_64* rng) {
    if (!rng || set.size() == 1) return set.front();
    return set[(*rng)() % set.size()];
}

} // namespace detail

// Explores variables reachable from the anchor through constraints whose
// restriction is the graph of an isomorphism onto the anchor quotient.
inline DomainGroup domain_group(const BinaryInstance& g, const FiniteAlgebra& anchor_algebra, int i0, std::vector<int> c,
                                Congruence theta, const AffineOptions& opts = {}) {
    std::sort(c.begin(), c.end());
    const int n = g.num_variables(), u = g.universe_size();
    DomainGroup dg;
    dg.anchor = i0;
    dg.anchor_set = c;
    dg.theta = theta;
    const int q = static_cast<int>(theta.blocks.size());
    int zero_block = 0;
    if (opts.zero_rng && q > 1) zero_block = static_cast<int>((*opts.zero_rng)() % q);
    auto qg = detail::quotient_group(anchor_algebra, c, theta, opts, zero_block);
    dg.group = qg.group;
    dg.maltsev = qg.maltsev;
    dg.member_of.assign(n, -1);

    GroupMember root;
    root.var = i0;
    root.support = c;
    root.label.assign(u, -1);
    for (int b = 0; b < q; ++b)
        for (int v : theta.blocks[b]) root.label[v] = b;
    dg.members.push_back(std::move(root));
    dg.member_of[i0] = 0;

    for (std::size_t h = 0; h < dg.members.size() && q > 1; ++h) {
        const int from = dg.members[h].var;
        for (int v = 0; v < n; ++v) {
            if (dg.member_of[v] >= 0) continue;
            const std::vector<int> lab = dg.members[h].label;
            std::vector<std::pair<int, int>> rel;  // (b, q)
            std::set<int> sv;
            for (int a = 0; a < u; ++a) {
                if (lab[a] < 0) continue;
                for (int b = 0; b < u; ++b)
                    if (g.in_domain(v, b) && g.allows(from, v, a, b)) {
                        rel.emplace_back(b, lab[a]);
                        sv.insert(b);
                    }
            }
            if (sv.empty()) continue;
            std::vector<int> qs(q);
            std::iota(qs.begin(), qs.end(), 0);
            auto cls = detail::classify(rel, std::vector<int>(sv.begin(), sv.end()), qs);
            if (!cls || cls->kind != LinkKind::IsoGraph) continue;
            GroupMember m;
            m.var = v;
            m.parent = static_cast<int>(h);
            m.support.assign(sv.begin(), sv.end());
            m.label.assign(u, -1);
            for (std::size_t blk = 0; blk < cls->theta.blocks.size(); ++blk)
                for (int b : cls->theta.blocks[blk]) m.label[b] = cls->iso[blk];
            dg.member_of[v] = static_cast<int>(dg.members.size());
            dg.members.push_back(std::move(m));
        }
    }
    for (auto& m : dg.members) {
        m.zero_value = detail::pick(m.support, opts.zero_rng);
        m.coord.assign(u, -1);
        int z = m.label[m.zero_value];
        for (int b : m.support) m.coord[b] = dg.group.sub(m.label[b], z);
    }
    return dg;
}

// Quotient system over the group: one variable per member, one equation per
// pair whose restricted constraint is a bijection graph in coordinates.
// Empty restrictions become conflicts, rectangles with a single row or
// column become pins, and any other shape contributes nothing.
inline LinearSystem encode_linear_system(const DomainGroup& dg, const BinaryInstance& g) {
    LinearSystem sys;
    sys.group = dg.group;
    sys.num_vars = static_cast<int>(dg.members.size());
    const int q = dg.group.order;
    const int u = g.universe_size();
    for (int i = 0; i < sys.num_vars; ++i)
        for (int j = i + 1; j < sys.num_vars; ++j) {
            const GroupMember& mi = dg.members[i];
            const GroupMember& mj = dg.members[j];
            std::vector<char> rel(static_cast<std::size_t>(q) * q, 0);
            int count = 0;
            for (int a : mi.support)
                for (int b : mj.support)
                    if (g.allows(mi.var, mj.var, a, b)) {
                        char& cell = rel[static_cast<std::size_t>(mi.coord[a]) * q + mj.coord[b]];
                        if (!cell) { cell = 1; ++count; }
                    }
            (void)u;
            if (count == 0) {
                sys.conflicts.emplace_back(i, j);
                continue;
            }
            if (count == q * q) continue;
            std::vector<int> row(q, 0), col(q, 0), img(q, -1);
            for (int x = 0; x < q; ++x)
                for (int y = 0; y < q; ++y)
                    if (rel[static_cast<std::size_t>(x) * q + y]) {
                        ++row[x];
                        ++col[y];
                        img[x] = y;
                    }
            bool bij = count == q && std::all_of(row.begin(), row.end(), [](int r) { return r == 1; }) &&
                       std::all_of(col.begin(), col.end(), [](int c) { return c == 1; });
            if (bij) {
                Equation e;
                e.from = i;
                e.to = j;
                e.offset = img[dg.group.zero];
                std::vector<int> tw(q);
                bool ident = true;
                for (int x = 0; x < q; ++x) {
                    tw[x] = dg.group.sub(img[x], e.offset);
                    ident &= tw[x] == x;
                }
                if (!ident) e.twist = std::move(tw);
                sys.equations.push_back(std::move(e));
                continue;
            }
            std::vector<int> rows, cols;
            for (int x = 0; x < q; ++x)
                if (row[x]) rows.push_back(x);
            for (int y = 0; y < q; ++y)
                if (col[y]) cols.push_back(y);
            if (static_cast<std::size_t>(count) == rows.size() * cols.size()) {
                if (rows.size() == 1) sys.pin(i, rows.front());
                if (cols.size() == 1) sys.pin(j, cols.front());
            }
        }
    return sys;
}

// --------------------------------------------------------- #L checks

// Subuniverses of `alg` inside `domain` that contain x, found by closing
// upwards one element at a time.
inline std::vector<std::vector<int>> subuniverses_containing(const FiniteAlgebra& alg, const std::vector<int>& domain, int x,
                                                             std::size_t cap = 4096) {
    std::set<int> dom(domain.begin(), domain.end());
    auto inside = [&](const std::vector<int>& s) {
        return std::all_of(s.begin(), s.end(), [&](int v) { return dom.count(v) > 0; });
    };
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> work;
    auto start = subalgebra_generated(alg, {x});
    if (!inside(start)) return {};
    seen.insert(start);
    work.push_back(start);
    for (std::size_t h = 0; h < work.size(); ++h) {
        const std::vector<int> cur = work[h];
        for (int y : domain) {
            if (std::binary_search(cur.begin(), cur.end(), y)) continue;
            std::vector<int> seed = cur;
            seed.push_back(y);
            auto next = subalgebra_generated(alg, seed);
            if (!inside(next) || !seen.insert(next).second) continue;
            if (seen.size() > cap) throw CapExceeded("too many subuniverses to enumerate");
            work.push_back(std::move(next));
        }
    }
    std::vector<std::vector<int>> out(seen.begin(), seen.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
    return out;
}

// Simple subuniverses with at least two elements whose algebra has an
// affine witness.
inline std::vector<std::vector<int>> simple_affine_subuniverses(const FiniteAlgebra& alg, const std::vector<int>& domain, int x,
                                                                const AffineOptions& opts = {}) {
    std::vector<std::vector<int>> out;
    for (auto& s : subuniverses_containing(alg, domain, x, opts.subuniverse_cap)) {
        if (s.size() < 2) continue;
        Subalgebra sub = subalgebra(alg, s);
        if (!is_simple(sub.algebra, opts.congruence_cap)) continue;
        try {
            detail::quotient_group(alg, s, diagonal_congruence(s), opts, 0);
        } catch (const InvalidInput&) {
            continue;
        }
        out.push_back(std::move(s));
    }
    return out;
}

struct SharpLResult {
    bool pass = true;
    std::vector<int> subuniverse;  // the rejecting choice when !pass
    std::optional<DomainGroup> group;
    std::optional<LinearSystem> system;
    std::optional<LinearCertificate> certificate;
};

// Point x of P_i passes when every simple affine subuniverse B containing it
// yields a solvable quotient system with x_i pinned to x.
inline SharpLResult sharp_L_check(const BinaryInstance& g, const FiniteAlgebra& alg, int i, int x, const AffineOptions& opts = {}) {
    SharpLResult res;
    if (!g.in_domain(i, x)) throw InvalidInput("point outside the domain");
    for (const auto& b : simple_affine_subuniverses(alg, g.domain(i), x, opts)) {
        DomainGroup dg = domain_group(g, alg, i, b, diagonal_congruence(b), opts);
        LinearSystem sys = encode_linear_system(dg, g);
        sys.pin(0, dg.members[0].coord[x]);
        LinearResult lr = solve_linear_system(sys);
        if (!lr.sat) {
            res.pass = false;
            res.subuniverse = b;
            res.group = std::move(dg);
            res.system = std::move(sys);
            res.certificate = lr.certificate;
            return res;
        }
    }
    return res;
}

// ------------------------------------------------------------- solver

struct SolveOptions {
    bool assume_core = false;
    int core_cap = 12;
    int depth = kDefaultTermDepth;
    int congruence_cap = kDefaultCongruenceCap;
    std::optional<std::uint64_t> zero_seed;
    bool check_closure = true;
    BinarizeOptions binarize;
};

struct SolveResult {
    bool sat = false;
    Assignment assignment;
    std::vector<Removal> trace;  // every removal in order, on binarized variables
    std::vector<std::string> variable_names;  // binarized variable names for the trace
    // First refuted quotient system, when one was found.
    std::optional<LinearSystem> system;
    std::optional<LinearCertificate> certificate;
    std::vector<int> system_vars;  // member index -> binarized variable
};

// Every operation maps tuples of every constraint relation (and of every
// domain) back into it.
inline void check_algebra_preserves(const Instance& inst, const FiniteAlgebra& alg, std::size_t budget = 50'000'000) {
    std::vector<std::pair<std::string, std::vector<Tuple>>> rels;
    std::set<int> used;
    for (const auto& c : inst.constraints) used.insert(c.relation);
    for (int r : used) rels.push_back({inst.relations[r].name, inst.relations[r].tuples});
    std::set<std::vector<int>> doms(inst.domains.begin(), inst.domains.end());
    for (const auto& d : doms) {
        std::vector<Tuple> ts;
        for (int v : d) ts.push_back({v});
        rels.push_back({"domain", std::move(ts)});
    }
    std::size_t spent = 0;
    for (const auto& [name, tuples] : rels) {
        std::set<Tuple> in(tuples.begin(), tuples.end());
        if (tuples.empty()) continue;
        const std::size_t arity = tuples.front().size();
        for (std::size_t op = 0; op < alg.operations.size(); ++op) {
            const int k = alg.operations[op].arity;
            std::vector<std::size_t> pick(k, 0);
            std::vector<int> args(k);
            Tuple image(arity);
            for (;;) {
                if (++spent > budget) throw CapExceeded("closure check budget exceeded");
                for (std::size_t j = 0; j < arity; ++j) {
                    for (int i = 0; i < k; ++i) args[i] = tuples[pick[i]][j];
                    image[j] = alg.apply(static_cast<int>(op), args);
                }
                if (!in.count(image))
                    throw InvalidInput("operation '" + alg.operations[op].name + "' does not preserve " +
                                       (name == "domain" ? std::string("a variable domain") : "relation '" + name + "'"));
                int i = k - 1;
                while (i >= 0 && ++pick[i] == tuples.size()) pick[i--] = 0;
                if (i < 0) break;
            }
        }
    }
}

namespace detail {

class Solver {
public:
    Solver(const Instance& inst, const FiniteAlgebra& alg, const SolveOptions& opts) : inst_(inst), alg_(alg), opts_(opts) {
        if (opts.zero_seed) rng_ = std::make_unique<std::mt19937_64>(*opts.zero_seed);
        aopts_.depth = opts.depth;
        aopts_.congruence_cap = opts.congruence_cap;
        aopts_.zero_rng = rng_.get();
    }

    SolveResult run() {
        inst_.validate();
        alg_.validate();
        if (alg_.size != inst_.universe_size) throw InvalidInput("algebra universe differs from the instance universe");
        if (opts_.check_closure) check_algebra_preserves(inst_, alg_);
        BinarizeResult bin = binarize(inst_, opts_.binarize);
        res_.variable_names = display_names(inst_, bin.mapping);
        lifted_ = lift_algebra(alg_, bin.mapping.arity);
        BinaryInstance g = std::move(bin.graph);
        if (!opts_.assume_core) {
            CoreReport rep = is_core(g, opts_.core_cap);
            if (!rep.is_core)
                throw InvalidInput("multiconsistency graph is not a core; pass --assume-core to solve anyway");
        }
        DomainAlgebras algs({lifted_}, g.num_variables(), opts_.depth, opts_.congruence_cap);
        TypeReduceResult tr = type_reduce(g, algs);
        append(tr.log);
        if (tr.unsat) return res_;
        g = std::move(tr.graph);
        if (!sweep(g)) return res_;
        descend(g);
        Assignment bsol(g.num_variables());
        for (int x = 0; x < g.num_variables(); ++x) bsol[x] = g.domain(x).front();
        Assignment sol = project_solution(bsol, bin.mapping);
        if (!evaluate_assignment(inst_, sol)) throw InternalError("constructed assignment fails re-verification");
        res_.sat = true;
        res_.assignment = std::move(sol);
        return res_;
    }

private:
    void append(const std::vector<Removal>& rs) { res_.trace.insert(res_.trace.end(), rs.begin(), rs.end()); }

    static bool empty_somewhere(const BinaryInstance& g) {
        for (int x = 0; x < g.num_variables(); ++x)
            if (g.domain_size(x) == 0) return true;
        return false;
    }

    bool propagate(BinaryInstance& g) {
        PropagationResult pr = run_12_consistency(g);
        g = std::move(pr.reduced);
        append(pr.removal_log);
        return pr.status == PropagationStatus::SatPossible;
    }

    // Removes every point failing its check, re-propagating after each
    // removal, until all remaining points pass.
    bool sweep(BinaryInstance& g) {
        for (bool changed = true; changed;) {
            changed = false;
            for (int x = 0; x < g.num_variables(); ++x)
                for (int a = 0; a < g.universe_size(); ++a) {
                    if (!g.in_domain(x, a)) continue;
                    SharpLResult r = sharp_L_check(g, lifted_, x, a, aopts_);
                    if (r.pass) continue;
                    if (!res_.certificate) {
                        res_.system = r.system;
                        res_.certificate = r.certificate;
                        res_.system_vars.clear();
                        for (const auto& m : r.group->members) res_.system_vars.push_back(m.var);
                    }
                    g.remove_value(x, a);
                    res_.trace.push_back({x, a, -1, "sharp-L"});
                    if (!propagate(g)) return false;
                    changed = true;
                }
        }
        return !empty_somewhere(g);
    }

    void descend(BinaryInstance& g) {
        for (;;) {
            int x = -1;
            for (int v = 0; v < g.num_variables() && x < 0; ++v)
                if (g.domain_size(v) >= 2) x = v;
            if (x < 0) return;
            const std::vector<int> dom = g.domain(x);
            if (!is_subuniverse(lifted_, dom))
                throw InternalError("construction failed: domain of variable " + std::to_string(x + 1) + " is not closed");
            Subalgebra sub = subalgebra(lifted_, dom);
            Congruence theta = diagonal_congruence(dom);
            if (!is_simple(sub.algebra, opts_.congruence_cap)) {
                auto local = least_maximal_congruence(sub.algebra, opts_.congruence_cap);
                theta.blocks.clear();
                for (const auto& blk : local->blocks) {
                    std::vector<int> vals;
                    for (int i : blk) vals.push_back(sub.elements[i]);
                    theta.blocks.push_back(std::move(vals));
                }
                theta.is_maximal = true;
            }
            DomainGroup dg;
            try {
                dg = domain_group(g, lifted_, x, dom, theta, aopts_);
            } catch (const InvalidInput& e) {
                throw InternalError(std::string("construction failed: ") + e.what());
            }
            LinearSystem base = encode_linear_system(dg, g);
            bool placed = false;
            for (std::size_t blk = 0; blk < theta.blocks.size() && !placed; ++blk) {
                LinearSystem sys = base;
                sys.pin(0, dg.members[0].coord[theta.blocks[blk].front()]);
                LinearResult lr = solve_linear_system(sys);
                if (!lr.sat) continue;
                for (std::size_t mi = 0; mi < dg.members.size(); ++mi) {
                    const GroupMember& m = dg.members[mi];
                    std::vector<int> keep;
                    for (int b : m.support)
                        if (m.coord[b] == lr.values[mi]) keep.push_back(b);
                    g.restrict_domain(m.var, keep);
                }
                if (!propagate(g) || !sweep(g))
                    throw InternalError("construction failed: restriction of variable " + std::to_string(x + 1) + " emptied a domain");
                placed = true;
            }
            if (!placed) throw InternalError("construction failed: no block of variable " + std::to_string(x + 1) + " is consistent");
        }
    }

    const Instance& inst_;
    const FiniteAlgebra& alg_;
    SolveOptions opts_;
    AffineOptions aopts_;
    std::unique_ptr<std::mt19937_64> rng_;
    FiniteAlgebra lifted_;
    SolveResult res_;
};

} // namespace detail

// Decides the instance. SAT results carry a verified assignment; UNSAT
// results carry the removal trace and, when a quotient system was refuted,
// that system with its certificate.
inline SolveResult solve(const Instance& inst, const FiniteAlgebra& alg, const SolveOptions& opts = {}) {
    return detail::Solver(inst, alg, opts).run();
}

} // namespace mcsp
