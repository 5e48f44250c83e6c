#pragma once

// Bulatov edge colouring, bounded term search and affine (abelian group)
// witnesses.

#include <algorithm>
#include <cstddef>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mcsp/algebra.hpp"

namespace mcsp {

inline constexpr int kDefaultTermDepth = 2;

// --------------------------------------------------------------- groups

// Finite abelian group on 0..order-1 given by tables.
struct AbelianGroup {
    int order = 0;
    int zero = 0;
    std::vector<int> add_table;  // add_table[a * order + b]
    std::vector<int> neg_table;
    std::vector<int> elements;   // value represented by each group index

    int add(int a, int b) const { return add_table[static_cast<std::size_t>(a) * order + b]; }
    int neg(int a) const { return neg_table[a]; }
    int sub(int a, int b) const { return add(a, neg(b)); }

    static AbelianGroup cyclic(int n) {
        AbelianGroup g;
        g.order = n;
        g.add_table.resize(static_cast<std::size_t>(n) * n);
        g.neg_table.resize(n);
        g.elements.resize(n);
        for (int a = 0; a < n; ++a) {
            g.elements[a] = a;
            g.neg_table[a] = (n - a) % n;
            for (int b = 0; b < n; ++b) g.add_table[static_cast<std::size_t>(a) * n + b] = (a + b) % n;
        }
        return g;
    }

    bool operator==(const AbelianGroup&) const = default;
};

struct AffineWitness {
    bool ok = false;
    std::string reason;  // set when !ok
    AbelianGroup group;  // indices are positions in the sorted subuniverse
};

// Builds x + y := m(x, z, y) on the subuniverse with zero z and checks the
// abelian group axioms together with m(x,y,w) = x - y + w. `zero` defaults
// to the least element.
inline AffineWitness verify_affine_witness(const FiniteAlgebra& alg, std::vector<int> subuniverse, const Term& m, int zero = -1) {
    std::sort(subuniverse.begin(), subuniverse.end());
    subuniverse.erase(std::unique(subuniverse.begin(), subuniverse.end()), subuniverse.end());
    AffineWitness w;
    const int n = static_cast<int>(subuniverse.size());
    if (n == 0) { w.reason = "empty subuniverse"; return w; }
    std::vector<int> local(alg.size, -1);
    for (int i = 0; i < n; ++i) local[subuniverse[i]] = i;
    auto ev = [&](int x, int y, int z) {
        return local[apply_term(alg, m, {subuniverse[x], subuniverse[y], subuniverse[z]})];
    };
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z)
                if (ev(x, y, z) < 0) { w.reason = "term leaves the subuniverse"; return w; }
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            if (ev(x, x, y) != y || ev(y, x, x) != y) { w.reason = "term is not Maltsev"; return w; }

    int z = zero < 0 ? 0 : local.at(zero);
    if (z < 0) { w.reason = "zero outside the subuniverse"; return w; }
    AbelianGroup& g = w.group;
    g.order = n;
    g.elements = subuniverse;
    g.add_table.resize(static_cast<std::size_t>(n) * n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) g.add_table[static_cast<std::size_t>(x) * n + y] = ev(x, z, y);
    // Identity element: z itself.
    for (int x = 0; x < n; ++x)
        if (g.add(x, z) != x || g.add(z, x) != x) { w.reason = "zero is not neutral"; return w; }
    g.zero = z;
    g.neg_table.assign(n, -1);
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y)
            if (g.add(x, y) == z) { g.neg_table[x] = y; break; }
        if (g.neg_table[x] < 0) { w.reason = "missing inverse"; return w; }
    }
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
            if (g.add(x, y) != g.add(y, x)) { w.reason = "addition is not commutative"; return w; }
            for (int u = 0; u < n; ++u) {
                if (g.add(g.add(x, y), u) != g.add(x, g.add(y, u))) { w.reason = "addition is not associative"; return w; }
                if (ev(x, y, u) != g.add(g.sub(x, y), u)) { w.reason = "term differs from x - y + z"; return w; }
            }
        }
    w.ok = true;
    return w;
}

// -------------------------------------------------------- term search

struct TermTable {
    Term term;
    std::vector<int> table;  // values on all argument tuples, first argument most significant
};

// Terms in `vars` variables built from basic operations up to `depth`,
// deduplicated by their table on `alg`. The evaluation budget keeps wide
// signatures from exploding; enumeration stops cleanly once it is spent.
inline std::vector<TermTable> enumerate_terms(const FiniteAlgebra& alg, int vars, int depth, std::size_t budget = 4'000'000) {
    const int n = alg.size;
    std::size_t rows = 1;
    for (int i = 0; i < vars; ++i) rows *= n;
    std::vector<TermTable> pool;
    std::set<std::vector<int>> seen;
    for (int v = 0; v < vars; ++v) {
        std::vector<int> t(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            std::size_t rest = r;
            for (int i = vars - 1; i > v; --i) rest /= n;
            t[r] = static_cast<int>(rest % n);
        }
        if (seen.insert(t).second) pool.push_back({Term::variable(v), std::move(t)});
    }
    std::size_t spent = 0;
    for (int d = 1; d <= depth; ++d) {
        const std::size_t frozen = pool.size();
        for (std::size_t op = 0; op < alg.operations.size(); ++op) {
            const int k = alg.operations[op].arity;
            std::vector<std::size_t> pick(k, 0);
            std::vector<int> args(k);
            for (;;) {
                spent += rows;
                if (spent > budget) return pool;
                std::vector<int> t(rows);
                for (std::size_t r = 0; r < rows; ++r) {
                    for (int i = 0; i < k; ++i) args[i] = pool[pick[i]].table[r];
                    t[r] = alg.apply(static_cast<int>(op), args);
                }
                if (seen.insert(t).second) {
                    std::vector<Term> sub;
                    for (int i = 0; i < k; ++i) sub.push_back(pool[pick[i]].term);
                    pool.push_back({Term::apply(static_cast<int>(op), std::move(sub)), std::move(t)});
                }
                int i = k - 1;
                while (i >= 0 && ++pick[i] == frozen) pick[i--] = 0;
                if (i < 0) break;
            }
        }
    }
    return pool;
}

// First ternary term (by depth, then generation order) satisfying the
// Maltsev identities on the whole algebra.
inline std::optional<Term> find_maltsev_term(const FiniteAlgebra& alg, int depth = kDefaultTermDepth) {
    const int n = alg.size;
    auto idx = [n](int x, int y, int z) { return (static_cast<std::size_t>(x) * n + y) * n + z; };
    for (const auto& tt : enumerate_terms(alg, 3, depth)) {
        bool ok = true;
        for (int x = 0; x < n && ok; ++x)
            for (int y = 0; y < n && ok; ++y)
                ok = tt.table[idx(x, x, y)] == y && tt.table[idx(y, x, x)] == y;
        if (ok) return tt.term;
    }
    return std::nullopt;
}

// Affine witness for the whole algebra, searching for a Maltsev term first.
inline std::optional<AffineWitness> find_affine_structure(const FiniteAlgebra& alg, int depth = kDefaultTermDepth, int zero = -1) {
    std::vector<int> all(alg.size);
    std::iota(all.begin(), all.end(), 0);
    if (alg.size == 1) {
        AffineWitness w;
        w.ok = true;
        w.group = AbelianGroup::cyclic(1);
        return w;
    }
    auto m = find_maltsev_term(alg, depth);
    if (!m) return std::nullopt;
    AffineWitness w = verify_affine_witness(alg, all, *m, zero);
    if (!w.ok) return std::nullopt;
    return w;
}

// ------------------------------------------------------------ colouring

enum class Colour { Red, Yellow, Blue, None };

inline const char* to_string(Colour c) {
    switch (c) {
        case Colour::Red: return "red";
        case Colour::Yellow: return "yellow";
        case Colour::Blue: return "blue";
        case Colour::None: return "none";
    }
    return "none";
}

struct EdgeColour {
    int a = 0;
    int b = 0;
    Colour colour = Colour::None;
    Congruence witness_congruence;  // on Sg(a,b)
    std::optional<Term> witness_term;
    bool thin = false;
};

namespace detail {

struct QuotientVerdict {
    Colour colour = Colour::None;
    std::optional<Term> term;
};

inline std::string quotient_key(const FiniteAlgebra& q, int qa, int qb, int depth) {
    std::string key = std::to_string(q.size) + "/" + std::to_string(qa) + "/" + std::to_string(qb) + "/" + std::to_string(depth);
    for (const auto& o : q.operations) {
        key += "|" + std::to_string(o.arity) + ":";
        for (int v : o.table) {
            key += static_cast<char>('0' + v % 64);
            if (v >= 64) key += "#" + std::to_string(v);
        }
    }
    return key;
}

// Witness search on a simple quotient q for the pair (qa, qb).
inline QuotientVerdict classify_quotient(const FiniteAlgebra& q, int qa, int qb, int depth) {
    static std::mutex mu;
    static std::unordered_map<std::string, QuotientVerdict> memo;
    const std::string key = quotient_key(q, qa, qb, depth);
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
    }
    const int n = q.size;
    QuotientVerdict verdict;
    const int pair[2] = {qa, qb};

    for (const auto& tt : enumerate_terms(q, 2, depth)) {
        auto f = [&](int x, int y) { return tt.table[static_cast<std::size_t>(x) * n + y]; };
        if (f(qa, qa) != qa || f(qb, qb) != qb) continue;
        int ab = f(qa, qb);
        if (ab == f(qb, qa) && (ab == qa || ab == qb)) {
            verdict = {Colour::Red, tt.term};
            break;
        }
    }
    if (verdict.colour == Colour::None) {
        auto ternary = enumerate_terms(q, 3, depth);
        auto g = [&](const TermTable& tt, int x, int y, int z) { return tt.table[(static_cast<std::size_t>(x) * n + y) * n + z]; };
        for (const auto& tt : ternary) {
            bool maj = true;
            for (int i = 0; i < 2 && maj; ++i)
                for (int j = 0; j < 2 && maj; ++j) {
                    int x = pair[i], y = pair[j];
                    maj = g(tt, x, x, y) == x && g(tt, x, y, x) == x && g(tt, y, x, x) == x;
                }
            if (maj) {
                verdict = {Colour::Yellow, tt.term};
                break;
            }
        }
        if (verdict.colour == Colour::None) {
            std::vector<int> all(n);
            std::iota(all.begin(), all.end(), 0);
            for (const auto& tt : ternary) {
                bool maltsev = true;
                for (int x = 0; x < n && maltsev; ++x)
                    for (int y = 0; y < n && maltsev; ++y) maltsev = g(tt, x, x, y) == y && g(tt, y, x, x) == y;
                if (maltsev && verify_affine_witness(q, all, tt.term).ok) {
                    verdict = {Colour::Blue, tt.term};
                    break;
                }
            }
        }
    }
    std::lock_guard<std::mutex> lock(mu);
    memo.emplace(key, verdict);
    return verdict;
}

} // namespace detail

// Colours the edge {a,b}: takes the lexicographically least maximal
// congruence of Sg(a,b) separating a and b, then searches terms up to
// `depth` on the simple quotient, preferring red, then yellow, then blue.
inline EdgeColour colour_edge(const FiniteAlgebra& alg, int a, int b, int depth = kDefaultTermDepth,
                              int congruence_cap = kDefaultCongruenceCap) {
    if (a == b) throw InvalidInput("an edge needs two distinct elements");
    if (a < 0 || b < 0 || a >= alg.size || b >= alg.size) throw InvalidInput("edge endpoint outside the universe");
    EdgeColour e;
    e.a = a;
    e.b = b;
    Subalgebra sub = subalgebra(alg, subalgebra_generated(alg, {a, b}));
    const int la = sub.local(a), lb = sub.local(b);
    std::optional<Congruence> theta;
    for (auto& c : congruences(sub.algebra, congruence_cap))
        if (c.is_maximal && !c.related(la, lb)) {
            theta = std::move(c);
            break;
        }
    if (!theta) return e;
    Congruence local_theta = *theta;
    e.thin = local_theta.is_diagonal();
    e.witness_congruence.carrier = sub.elements;
    for (const auto& blk : local_theta.blocks) {
        std::vector<int> vals;
        for (int i : blk) vals.push_back(sub.elements[i]);
        e.witness_congruence.blocks.push_back(std::move(vals));
    }
    e.witness_congruence.is_maximal = true;
    FiniteAlgebra q = quotient(sub.algebra, local_theta);
    auto verdict = detail::classify_quotient(q, local_theta.block_of(la), local_theta.block_of(lb), depth);
    e.colour = verdict.colour;
    e.witness_term = verdict.term;
    return e;
}

struct ColouredGraph {
    std::vector<EdgeColour> edges;  // all pairs a < b
    bool connected = true;          // over edges with a colour other than none
};

inline ColouredGraph coloured_graph(const FiniteAlgebra& alg, int depth = kDefaultTermDepth) {
    ColouredGraph g;
    detail::UnionFind uf(alg.size);
    for (int a = 0; a < alg.size; ++a)
        for (int b = a + 1; b < alg.size; ++b) {
            g.edges.push_back(colour_edge(alg, a, b, depth));
            if (g.edges.back().colour != Colour::None) uf.unite(a, b);
        }
    for (int a = 1; a < alg.size; ++a)
        if (uf.find(a) != uf.find(0)) g.connected = false;
    return g;
}

// Colours edges of one algebra on demand, remembering results per pair.
class ColourCache {
public:
    explicit ColourCache(const FiniteAlgebra& alg, int depth = kDefaultTermDepth, int congruence_cap = kDefaultCongruenceCap)
        : alg_(alg), depth_(depth), cap_(congruence_cap) {}

    const EdgeColour& get(int a, int b) {
        if (a > b) std::swap(a, b);
        auto key = std::make_pair(a, b);
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, colour_edge(alg_, a, b, depth_, cap_)).first;
        return it->second;
    }

    const FiniteAlgebra& algebra() const { return alg_; }
    int depth() const { return depth_; }

private:
    const FiniteAlgebra& alg_;
    int depth_;
    int cap_;
    std::map<std::pair<int, int>, EdgeColour> cache_;
};

} // namespace mcsp
