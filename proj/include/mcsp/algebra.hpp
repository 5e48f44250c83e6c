#pragma once

// Finite algebras given by operation tables: terms, identities, closure,
// congruences, quotients, products and absorption.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcsp/error.hpp"

namespace mcsp {

struct Operation {
    std::string name;
    int arity = 0;
    std::vector<int> table;  // row index is the mixed-radix code of the arguments, first argument most significant

    bool operator==(const Operation&) const = default;
};

// Composition tree over basic operations; leaves are argument positions.
struct Term {
    int op = -1;  // -1 for a variable leaf
    int var = 0;
    std::vector<Term> args;

    static Term variable(int i) { return Term{-1, i, {}}; }
    static Term apply(int op, std::vector<Term> args) { return Term{op, 0, std::move(args)}; }

    bool is_variable() const { return op < 0; }

    int num_vars() const {
        if (is_variable()) return var + 1;
        int m = 0;
        for (const auto& a : args) m = std::max(m, a.num_vars());
        return m;
    }

    int depth() const {
        if (is_variable()) return 0;
        int d = 0;
        for (const auto& a : args) d = std::max(d, a.depth());
        return d + 1;
    }

    bool operator==(const Term&) const = default;
};

struct FiniteAlgebra {
    int size = 0;
    std::vector<Operation> operations;
    bool idempotent = false;        // checked by validate()
    std::optional<Term> taylor_term;  // optional supplied Taylor witness
    std::string redop;              // name of the supplied binary red-edge operation, empty if none

    int find_operation(std::string_view name) const {
        for (std::size_t i = 0; i < operations.size(); ++i)
            if (operations[i].name == name) return static_cast<int>(i);
        return -1;
    }

    int apply(int op, std::span<const int> args) const {
        const Operation& o = operations[op];
        std::size_t idx = 0;
        for (int a : args) idx = idx * size + a;
        return o.table[idx];
    }
    int apply(int op, std::initializer_list<int> args) const {
        return apply(op, std::span<const int>(args.begin(), args.size()));
    }

    // Table totality and closure, plus the idempotence flag when set.
    void validate() const {
        if (size <= 0) throw InvalidInput("algebra universe must be non-empty");
        std::set<std::string> names;
        for (const auto& o : operations) {
            if (!names.insert(o.name).second) throw InvalidInput("duplicate operation name '" + o.name + "'");
            if (o.arity <= 0) throw InvalidInput("operation '" + o.name + "' has non-positive arity");
            std::size_t rows = 1;
            for (int i = 0; i < o.arity; ++i) rows *= static_cast<std::size_t>(size);
            if (o.table.size() != rows) throw InvalidInput("operation '" + o.name + "' table is not total");
            for (int v : o.table)
                if (v < 0 || v >= size) throw InvalidInput("operation '" + o.name + "' is not closed");
        }
        if (idempotent) {
            for (std::size_t op = 0; op < operations.size(); ++op)
                for (int x = 0; x < size; ++x) {
                    std::vector<int> args(operations[op].arity, x);
                    if (apply(static_cast<int>(op), args) != x)
                        throw InvalidInput("idempotence violated at x=" + std::to_string(x) + " for '" + operations[op].name + "'");
                }
        }
        if (!redop.empty()) {
            int r = find_operation(redop);
            if (r < 0 || operations[r].arity != 2) throw InvalidInput("red-edge operation '" + redop + "' must name a binary operation");
        }
    }

    bool operator==(const FiniteAlgebra&) const = default;
};

inline bool is_idempotent(const FiniteAlgebra& alg) {
    for (std::size_t op = 0; op < alg.operations.size(); ++op)
        for (int x = 0; x < alg.size; ++x) {
            std::vector<int> args(alg.operations[op].arity, x);
            if (alg.apply(static_cast<int>(op), args) != x) return false;
        }
    return true;
}

// ---------------------------------------------------------------- terms

inline int apply_term(const FiniteAlgebra& alg, const Term& t, std::span<const int> args) {
    if (t.is_variable()) {
        if (t.var < 0 || t.var >= static_cast<int>(args.size())) throw InvalidInput("term variable outside the argument list");
        return args[t.var];
    }
    if (t.op >= static_cast<int>(alg.operations.size())) throw InvalidInput("term names an unknown operation");
    if (static_cast<int>(t.args.size()) != alg.operations[t.op].arity)
        throw InvalidInput("arity mismatch at '" + alg.operations[t.op].name + "'");
    std::vector<int> vals;
    vals.reserve(t.args.size());
    for (const auto& a : t.args) vals.push_back(apply_term(alg, a, args));
    return alg.apply(t.op, vals);
}

inline int apply_term(const FiniteAlgebra& alg, const Term& t, std::initializer_list<int> args) {
    return apply_term(alg, t, std::span<const int>(args.begin(), args.size()));
}

inline std::string to_string(const Term& t, const FiniteAlgebra& alg) {
    if (t.is_variable()) return "x" + std::to_string(t.var + 1);
    std::string s = alg.operations[t.op].name + "(";
    for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i) s += ",";
        s += to_string(t.args[i], alg);
    }
    return s + ")";
}

namespace detail {

class TermParser {
public:
    TermParser(std::string_view text, const FiniteAlgebra& alg) : s_(text), alg_(alg) {}

    Term parse() {
        Term t = term();
        skip();
        if (pos_ != s_.size()) fail("trailing characters");
        return t;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw InvalidInput("cannot parse term '" + std::string(s_) + "': " + why);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    std::string ident() {
        skip();
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        if (start == pos_) fail("expected a name");
        return std::string(s_.substr(start, pos_ - start));
    }
    Term term() {
        std::string name = ident();
        skip();
        if (pos_ < s_.size() && s_[pos_] == '(') {
            ++pos_;
            int op = alg_.find_operation(name);
            if (op < 0) fail("unknown operation '" + name + "'");
            std::vector<Term> args;
            for (;;) {
                args.push_back(term());
                skip();
                if (pos_ >= s_.size()) fail("unterminated argument list");
                if (s_[pos_] == ',') { ++pos_; continue; }
                if (s_[pos_] == ')') { ++pos_; break; }
                fail("expected ',' or ')'");
            }
            if (static_cast<int>(args.size()) != alg_.operations[op].arity) fail("arity mismatch at '" + name + "'");
            return Term::apply(op, std::move(args));
        }
        if (name.size() >= 2 && name[0] == 'x' && std::all_of(name.begin() + 1, name.end(), ::isdigit)) {
            int v = std::stoi(name.substr(1));
            if (v < 1) fail("variables are numbered from x1");
            return Term::variable(v - 1);
        }
        fail("expected a variable x<i> or an operation application");
    }

    std::string_view s_;
    const FiniteAlgebra& alg_;
    std::size_t pos_ = 0;
};

} // namespace detail

// Parses terms such as "m(x1,m(x2,x2,x3),x3)"; variables are x1, x2, ...
inline Term parse_term(std::string_view text, const FiniteAlgebra& alg) { return detail::TermParser(text, alg).parse(); }

// Term built from a single basic operation applied to x1..xk.
inline Term basic_term(const FiniteAlgebra& alg, int op) {
    std::vector<Term> args;
    for (int i = 0; i < alg.operations[op].arity; ++i) args.push_back(Term::variable(i));
    return Term::apply(op, std::move(args));
}

// ----------------------------------------------------------- identities

struct Identity {
    Term lhs;
    Term rhs;
};

// Exhaustive check over every assignment of universe values to variables.
inline bool check_identity(const FiniteAlgebra& alg, const Identity& id) {
    const int vars = std::max(id.lhs.num_vars(), id.rhs.num_vars());
    std::vector<int> args(vars, 0);
    for (;;) {
        if (apply_term(alg, id.lhs, args) != apply_term(alg, id.rhs, args)) return false;
        int i = vars - 1;
        while (i >= 0 && ++args[i] == alg.size) args[i--] = 0;
        if (i < 0) return true;
    }
}

inline bool check_identities(const FiniteAlgebra& alg, const std::vector<Identity>& ids) {
    return std::all_of(ids.begin(), ids.end(), [&](const Identity& id) { return check_identity(alg, id); });
}

namespace detail {
inline Term sub(const Term& t, const std::vector<Term>& with) {
    if (t.is_variable()) return with.at(t.var);
    std::vector<Term> args;
    for (const auto& a : t.args) args.push_back(sub(a, with));
    return Term::apply(t.op, std::move(args));
}
} // namespace detail

// Substitutes variables of `t` (x1 -> with[0], ...).
inline Term substitute(const Term& t, const std::vector<Term>& with) { return detail::sub(t, with); }

// m(x,x,y) = y and m(y,x,x) = y.
inline std::vector<Identity> maltsev_identities(const Term& m) {
    Term x = Term::variable(0), y = Term::variable(1);
    return {{substitute(m, {x, x, y}), y}, {substitute(m, {y, x, x}), y}};
}

// g(x,x,y) = g(x,y,x) = g(y,x,x) = x.
inline std::vector<Identity> majority_identities(const Term& g) {
    Term x = Term::variable(0), y = Term::variable(1);
    return {{substitute(g, {x, x, y}), x}, {substitute(g, {x, y, x}), x}, {substitute(g, {y, x, x}), x}};
}

// Idempotent, commutative, associative binary term.
inline std::vector<Identity> semilattice_identities(const Term& f) {
    Term x = Term::variable(0), y = Term::variable(1), z = Term::variable(2);
    return {{substitute(f, {x, x}), x},
            {substitute(f, {x, y}), substitute(f, {y, x})},
            {substitute(f, {x, substitute(f, {y, z})}), substitute(f, {substitute(f, {x, y}), z})}};
}

// t(y,x,...,x) = t(x,y,x,...,x) = ... = t(x,...,x,y) for a term of the given arity.
inline std::vector<Identity> taylor_identities(const Term& t, int arity) {
    if (arity < 2) throw InvalidInput("Taylor terms have arity at least 2");
    Term x = Term::variable(0), y = Term::variable(1);
    auto at = [&](int pos) {
        std::vector<Term> with(arity, x);
        with[pos] = y;
        return substitute(t, with);
    };
    std::vector<Identity> ids;
    for (int i = 0; i + 1 < arity; ++i) ids.push_back({at(i), at(i + 1)});
    return ids;
}

inline std::vector<Identity> idempotence_identities(const FiniteAlgebra& alg) {
    std::vector<Identity> ids;
    Term x = Term::variable(0);
    for (std::size_t op = 0; op < alg.operations.size(); ++op)
        ids.push_back({Term::apply(static_cast<int>(op), std::vector<Term>(alg.operations[op].arity, x)), x});
    return ids;
}

// ------------------------------------------------------------ closure

inline bool is_subuniverse(const FiniteAlgebra& alg, const std::vector<int>& set) {
    if (set.empty()) return false;
    std::vector<char> in(alg.size, 0);
    for (int a : set) in[a] = 1;
    for (std::size_t op = 0; op < alg.operations.size(); ++op) {
        const int k = alg.operations[op].arity;
        std::vector<std::size_t> pick(k, 0);
        std::vector<int> args(k);
        for (;;) {
            for (int i = 0; i < k; ++i) args[i] = set[pick[i]];
            if (!in[alg.apply(static_cast<int>(op), args)]) return false;
            int i = k - 1;
            while (i >= 0 && ++pick[i] == set.size()) pick[i--] = 0;
            if (i < 0) break;
        }
    }
    return true;
}

// Least subuniverse containing `seed`, by worklist closure: every round only
// evaluates argument tuples that involve an element added in the previous round.
inline std::vector<int> subalgebra_generated(const FiniteAlgebra& alg, const std::vector<int>& seed) {
    if (seed.empty()) throw InvalidInput("generating set must be non-empty");
    std::vector<char> in(alg.size, 0);
    std::vector<int> members, fresh;
    for (int a : seed) {
        if (a < 0 || a >= alg.size) throw InvalidInput("generator outside the universe");
        if (!in[a]) { in[a] = 1; members.push_back(a); fresh.push_back(a); }
    }
    std::vector<char> is_fresh(alg.size, 0);
    while (!fresh.empty()) {
        std::fill(is_fresh.begin(), is_fresh.end(), 0);
        for (int a : fresh) is_fresh[a] = 1;
        std::vector<int> next;
        const std::vector<int> pool = members;
        for (std::size_t op = 0; op < alg.operations.size(); ++op) {
            const int k = alg.operations[op].arity;
            std::vector<std::size_t> pick(k, 0);
            std::vector<int> args(k);
            for (;;) {
                bool touches = false;
                for (int i = 0; i < k; ++i) {
                    args[i] = pool[pick[i]];
                    touches |= is_fresh[args[i]] != 0;
                }
                if (touches) {
                    int v = alg.apply(static_cast<int>(op), args);
                    if (!in[v]) { in[v] = 1; members.push_back(v); next.push_back(v); }
                }
                int i = k - 1;
                while (i >= 0 && ++pick[i] == pool.size()) pick[i--] = 0;
                if (i < 0) break;
            }
        }
        fresh = std::move(next);
    }
    std::sort(members.begin(), members.end());
    return members;
}

// Subalgebra re-indexed to 0..|S|-1; elements[i] is the original value of i.
struct Subalgebra {
    FiniteAlgebra algebra;
    std::vector<int> elements;

    int local(int value) const {
        auto it = std::lower_bound(elements.begin(), elements.end(), value);
        if (it == elements.end() || *it != value) return -1;
        return static_cast<int>(it - elements.begin());
    }
};

inline Subalgebra subalgebra(const FiniteAlgebra& alg, std::vector<int> universe) {
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
    if (!is_subuniverse(alg, universe)) throw InvalidInput("set is not a subuniverse");
    Subalgebra s;
    s.elements = universe;
    s.algebra.size = static_cast<int>(universe.size());
    s.algebra.idempotent = alg.idempotent;
    s.algebra.redop = alg.redop;
    s.algebra.taylor_term = alg.taylor_term;
    std::vector<int> local(alg.size, -1);
    for (std::size_t i = 0; i < universe.size(); ++i) local[universe[i]] = static_cast<int>(i);
    for (std::size_t op = 0; op < alg.operations.size(); ++op) {
        Operation o{alg.operations[op].name, alg.operations[op].arity, {}};
        const int k = o.arity;
        const int n = s.algebra.size;
        std::size_t rows = 1;
        for (int i = 0; i < k; ++i) rows *= n;
        o.table.resize(rows);
        std::vector<int> args(k);
        for (std::size_t r = 0; r < rows; ++r) {
            std::size_t rest = r;
            for (int i = k - 1; i >= 0; --i) {
                args[i] = universe[rest % n];
                rest /= n;
            }
            o.table[r] = local[alg.apply(static_cast<int>(op), args)];
        }
        s.algebra.operations.push_back(std::move(o));
    }
    return s;
}

// ---------------------------------------------------------- congruences

// Partition of a carrier (actual values), blocks sorted by least element.
struct Congruence {
    std::vector<int> carrier;
    std::vector<std::vector<int>> blocks;
    bool is_maximal = false;

    int block_of(int value) const {
        for (std::size_t i = 0; i < blocks.size(); ++i)
            if (std::binary_search(blocks[i].begin(), blocks[i].end(), value)) return static_cast<int>(i);
        return -1;
    }
    bool related(int a, int b) const { return block_of(a) == block_of(b); }
    bool is_diagonal() const { return blocks.size() == carrier.size(); }
    bool is_full() const { return blocks.size() == 1; }

    bool operator==(const Congruence& o) const { return carrier == o.carrier && blocks == o.blocks; }
};

namespace detail {

// Restricted-growth labelling of a partition of 0..n-1.
using Labels = std::vector<int>;

inline Labels canonical(const Labels& raw) {
    std::map<int, int> rename;
    Labels out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto it = rename.find(raw[i]);
        if (it == rename.end()) it = rename.emplace(raw[i], static_cast<int>(rename.size())).first;
        out[i] = it->second;
    }
    return out;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (a < b) parent[b] = a; else parent[a] = b;
        return true;
    }
    Labels labels() {
        Labels l(parent.size());
        for (std::size_t i = 0; i < parent.size(); ++i) l[i] = find(static_cast<int>(i));
        return canonical(l);
    }
};

// Smallest congruence containing the given pairs: equivalence closure that is
// also closed under every basic translation x -> f(c1,..,x,..,ck).
inline Labels congruence_generated(const FiniteAlgebra& alg, const std::vector<std::pair<int, int>>& gens) {
    UnionFind uf(alg.size);
    std::vector<std::pair<int, int>> work;
    for (auto [a, b] : gens)
        if (uf.unite(a, b)) work.emplace_back(a, b);
    while (!work.empty()) {
        auto [u, v] = work.back();
        work.pop_back();
        for (std::size_t op = 0; op < alg.operations.size(); ++op) {
            const int k = alg.operations[op].arity;
            std::vector<int> args(k, 0);
            for (int pos = 0; pos < k; ++pos) {
                std::vector<int> others(k - 1, 0);
                for (;;) {
                    for (int i = 0, j = 0; i < k; ++i)
                        if (i != pos) args[i] = others[j++];
                    args[pos] = u;
                    int fu = alg.apply(static_cast<int>(op), args);
                    args[pos] = v;
                    int fv = alg.apply(static_cast<int>(op), args);
                    if (uf.unite(fu, fv)) work.emplace_back(fu, fv);
                    int i = k - 2;
                    while (i >= 0 && ++others[i] == alg.size) others[i--] = 0;
                    if (i < 0) break;
                }
            }
        }
    }
    return uf.labels();
}

inline Labels join(const Labels& a, const Labels& b) {
    UnionFind uf(static_cast<int>(a.size()));
    std::vector<int> first_a(a.size(), -1), first_b(b.size(), -1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (first_a[a[i]] < 0) first_a[a[i]] = static_cast<int>(i); else uf.unite(first_a[a[i]], static_cast<int>(i));
        if (first_b[b[i]] < 0) first_b[b[i]] = static_cast<int>(i); else uf.unite(first_b[b[i]], static_cast<int>(i));
    }
    return uf.labels();
}

inline bool finer_or_equal(const Labels& a, const Labels& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j)
            if (a[i] == a[j] && b[i] != b[j]) return false;
    return true;
}

inline int block_count(const Labels& l) { return l.empty() ? 0 : *std::max_element(l.begin(), l.end()) + 1; }

inline Congruence to_congruence(const Labels& l, const std::vector<int>& carrier) {
    Congruence c;
    c.carrier = carrier;
    c.blocks.assign(block_count(l), {});
    for (std::size_t i = 0; i < l.size(); ++i) c.blocks[l[i]].push_back(carrier[i]);
    for (auto& b : c.blocks) std::sort(b.begin(), b.end());
    std::sort(c.blocks.begin(), c.blocks.end());
    return c;
}

} // namespace detail

inline constexpr int kDefaultCongruenceCap = 64;

inline bool is_congruence(const FiniteAlgebra& alg, const Congruence& c) {
    std::vector<int> label(alg.size, -1);
    for (std::size_t b = 0; b < c.blocks.size(); ++b)
        for (int v : c.blocks[b]) label[v] = static_cast<int>(b);
    for (int v = 0; v < alg.size; ++v)
        if (label[v] < 0) return false;
    for (std::size_t op = 0; op < alg.operations.size(); ++op) {
        const int k = alg.operations[op].arity;
        std::vector<int> xs(k, 0), ys(k, 0);
        // Changing one coordinate at a time within a block suffices.
        for (int pos = 0; pos < k; ++pos) {
            std::vector<int> args(k, 0);
            for (;;) {
                int base = alg.apply(static_cast<int>(op), args);
                int keep = args[pos];
                for (int w = 0; w < alg.size; ++w) {
                    if (label[w] != label[keep]) continue;
                    args[pos] = w;
                    if (label[alg.apply(static_cast<int>(op), args)] != label[base]) return false;
                }
                args[pos] = keep;
                int i = k - 1;
                while (i >= 0 && ++args[i] == alg.size) args[i--] = 0;
                if (i < 0) break;
            }
        }
    }
    return true;
}

// All congruences, sorted by block structure, with coatoms flagged maximal.
// Generated as joins of principal congruences, so the cost tracks the size of
// the lattice rather than the number of partitions of the universe.
inline std::vector<Congruence> congruences(const FiniteAlgebra& alg, int cap = kDefaultCongruenceCap) {
    if (alg.size > cap) throw CapExceeded("congruence enumeration capped at " + std::to_string(cap) + " elements");
    const int n = alg.size;
    std::vector<detail::Labels> principal;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) principal.push_back(detail::congruence_generated(alg, {{a, b}}));
    std::set<detail::Labels> seen;
    detail::Labels bottom(n);
    std::iota(bottom.begin(), bottom.end(), 0);
    std::vector<detail::Labels> work{bottom};
    seen.insert(bottom);
    while (!work.empty()) {
        detail::Labels cur = work.back();
        work.pop_back();
        for (const auto& p : principal) {
            detail::Labels j = detail::join(cur, p);
            if (seen.insert(j).second) work.push_back(j);
        }
    }
    std::vector<int> carrier(n);
    std::iota(carrier.begin(), carrier.end(), 0);
    std::vector<detail::Labels> all(seen.begin(), seen.end());
    std::vector<Congruence> out;
    for (const auto& l : all) {
        Congruence c = detail::to_congruence(l, carrier);
        if (detail::block_count(l) > 1) {
            c.is_maximal = true;
            for (const auto& other : all)
                if (other != l && detail::block_count(other) > 1 && detail::finer_or_equal(l, other)) {
                    c.is_maximal = false;
                    break;
                }
        }
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const Congruence& a, const Congruence& b) { return a.blocks < b.blocks; });
    return out;
}

// One-element algebras count as simple.
inline bool is_simple(const FiniteAlgebra& alg, int cap = kDefaultCongruenceCap) {
    if (alg.size > cap) throw CapExceeded("congruence enumeration capped at " + std::to_string(cap) + " elements");
    if (alg.size <= 1) return true;
    for (int a = 0; a < alg.size; ++a)
        for (int b = a + 1; b < alg.size; ++b)
            if (detail::block_count(detail::congruence_generated(alg, {{a, b}})) != 1) return false;
    return true;
}

// Lexicographically least maximal congruence, or nullopt for a one-element algebra.
inline std::optional<Congruence> least_maximal_congruence(const FiniteAlgebra& alg, int cap = kDefaultCongruenceCap) {
    for (auto& c : congruences(alg, cap))
        if (c.is_maximal) return c;
    return std::nullopt;
}

inline Congruence diagonal_congruence(const std::vector<int>& carrier) {
    Congruence c;
    c.carrier = carrier;
    for (int v : carrier) c.blocks.push_back({v});
    return c;
}

// Quotient by a congruence on the whole universe; universe of the result is
// the block index.
inline FiniteAlgebra quotient(const FiniteAlgebra& alg, const Congruence& c) {
    std::vector<int> all(alg.size);
    std::iota(all.begin(), all.end(), 0);
    if (c.carrier != all) throw InvalidInput("congruence carrier must be the whole universe");
    if (!is_congruence(alg, c)) throw InvalidInput("not a congruence");
    FiniteAlgebra q;
    q.size = static_cast<int>(c.blocks.size());
    q.idempotent = alg.idempotent;
    q.redop = alg.redop;
    q.taylor_term = alg.taylor_term;
    std::vector<int> label(alg.size);
    for (std::size_t b = 0; b < c.blocks.size(); ++b)
        for (int v : c.blocks[b]) label[v] = static_cast<int>(b);
    for (std::size_t op = 0; op < alg.operations.size(); ++op) {
        Operation o{alg.operations[op].name, alg.operations[op].arity, {}};
        std::size_t rows = 1;
        for (int i = 0; i < o.arity; ++i) rows *= q.size;
        o.table.resize(rows);
        std::vector<int> args(o.arity);
        for (std::size_t r = 0; r < rows; ++r) {
            std::size_t rest = r;
            for (int i = o.arity - 1; i >= 0; --i) {
                args[i] = c.blocks[rest % q.size].front();
                rest /= q.size;
            }
            o.table[r] = label[alg.apply(static_cast<int>(op), args)];
        }
        q.operations.push_back(std::move(o));
    }
    return q;
}

// --------------------------------------------------------------- products

inline void require_same_signature(const FiniteAlgebra& a, const FiniteAlgebra& b) {
    if (a.operations.size() != b.operations.size()) throw InvalidInput("algebras have different signatures");
    for (std::size_t i = 0; i < a.operations.size(); ++i)
        if (a.operations[i].name != b.operations[i].name || a.operations[i].arity != b.operations[i].arity)
            throw InvalidInput("algebras have different signatures");
}

// Product A x B with element (a, b) encoded as a * |B| + b.
inline FiniteAlgebra product(const FiniteAlgebra& a, const FiniteAlgebra& b, std::size_t cap = std::size_t{1} << 24) {
    require_same_signature(a, b);
    FiniteAlgebra p;
    p.size = a.size * b.size;
    p.idempotent = a.idempotent && b.idempotent;
    p.redop = a.redop == b.redop ? a.redop : std::string{};
    for (std::size_t op = 0; op < a.operations.size(); ++op) {
        Operation o{a.operations[op].name, a.operations[op].arity, {}};
        std::size_t rows = 1;
        for (int i = 0; i < o.arity; ++i) rows *= p.size;
        if (rows > cap) throw CapExceeded("product operation table exceeds cap");
        o.table.resize(rows);
        std::vector<int> xs(o.arity), ys(o.arity);
        for (std::size_t r = 0; r < rows; ++r) {
            std::size_t rest = r;
            for (int i = o.arity - 1; i >= 0; --i) {
                int code = static_cast<int>(rest % p.size);
                rest /= p.size;
                xs[i] = code / b.size;
                ys[i] = code % b.size;
            }
            o.table[r] = a.apply(static_cast<int>(op), xs) * b.size + b.apply(static_cast<int>(op), ys);
        }
        p.operations.push_back(std::move(o));
    }
    return p;
}

// Subset C of A x B contains (a',b) whenever it contains (a,b), (a,b'), (a',b').
inline bool is_rectangular(const std::vector<std::pair<int, int>>& c) {
    std::set<std::pair<int, int>> s(c.begin(), c.end());
    for (auto [a, b] : s)
        for (auto [a2, b2] : s) {
            if (a2 != a && b2 != b && s.count({a, b2}) && !s.count({a2, b})) return false;
        }
    return true;
}

// -------------------------------------------------------------- absorption

// For all a in C, b in B and every position: t(a,..,b,..,a) lies in C.
inline bool is_absorbing(const FiniteAlgebra& alg, const std::vector<int>& b_set, const std::vector<int>& c_set, const Term& t) {
    std::set<int> bs(b_set.begin(), b_set.end()), cs(c_set.begin(), c_set.end());
    for (int c : cs)
        if (!bs.count(c)) throw InvalidInput("absorbing candidate is not contained in the subuniverse");
    const int m = t.num_vars();
    if (m < 2) throw InvalidInput("absorbing term needs arity at least 2");
    std::vector<int> args(m);
    for (int a : cs)
        for (int b : bs)
            for (int pos = 0; pos < m; ++pos) {
                std::fill(args.begin(), args.end(), a);
                args[pos] = b;
                if (!cs.count(apply_term(alg, t, args))) return false;
            }
    return true;
}

} // namespace mcsp
