#pragma once

// Small algebras, instances and random generators shared by the tests.

#include <cstdint>
#include <random>
#include <vector>

#include "mcsp/mcsp.hpp"

namespace fx {

using namespace mcsp;

inline Operation table_op(const std::string& name, int arity, int n, auto fn) {
    std::size_t rows = 1;
    for (int i = 0; i < arity; ++i) rows *= n;
    Operation op{name, arity, std::vector<int>(rows)};
    std::vector<int> args(arity);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t rest = r;
        for (int i = arity - 1; i >= 0; --i) {
            args[i] = static_cast<int>(rest % n);
            rest /= n;
        }
        op.table[r] = fn(args);
    }
    return op;
}

inline FiniteAlgebra single(int n, Operation op, bool idempotent = true) {
    FiniteAlgebra a;
    a.size = n;
    a.idempotent = idempotent;
    a.operations.push_back(std::move(op));
    return a;
}

inline FiniteAlgebra z(int q) { return affine_algebra(q); }

inline FiniteAlgebra min2() {
    FiniteAlgebra a = single(2, table_op("f", 2, 2, [](const std::vector<int>& v) { return std::min(v[0], v[1]); }));
    a.redop = "f";
    return a;
}

inline FiniteAlgebra majority2() {
    return single(2, table_op("g", 3, 2, [](const std::vector<int>& v) { return (v[0] + v[1] + v[2]) >= 2 ? 1 : 0; }));
}

// Meet semilattice 0 < 1, 0 < 2 with 1 and 2 incomparable.
inline FiniteAlgebra vee3() {
    FiniteAlgebra a = single(3, table_op("f", 2, 3, [](const std::vector<int>& v) { return v[0] == v[1] ? v[0] : 0; }));
    a.redop = "f";
    return a;
}

// Chain 0 < 1 < 2 under min.
inline FiniteAlgebra chain3() {
    FiniteAlgebra a = single(3, table_op("f", 2, 3, [](const std::vector<int>& v) { return std::min(v[0], v[1]); }));
    a.redop = "f";
    return a;
}

inline FiniteAlgebra one_element() { return single(1, table_op("m", 3, 1, [](const std::vector<int>&) { return 0; })); }

inline Relation neq(int n) {
    std::vector<Tuple> ts;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (a != b) ts.push_back({a, b});
    return Relation("neq", 2, ts);
}

inline Instance three_colouring_triangle() {
    Instance inst(3, 3);
    int r = inst.add_relation(neq(3));
    inst.add_constraint({0, 1}, r);
    inst.add_constraint({1, 2}, r);
    inst.add_constraint({0, 2}, r);
    return inst;
}

// x_j = x_i + c on every edge of a triangle over Z_q.
inline Instance shift_triangle(int q, int c) {
    Instance inst(q, 3);
    int r = inst.add_relation(shift_relation(q, c));
    inst.add_constraint({0, 1}, r);
    inst.add_constraint({1, 2}, r);
    inst.add_constraint({2, 0}, r);
    return inst;
}

inline Instance xor_triangle() { return shift_triangle(2, 1); }

inline BinaryInstance binary(int n, int u, const std::vector<std::vector<int>>& doms) {
    BinaryInstance g(n, u);
    for (int x = 0; x < n; ++x)
        for (int a : doms[x]) g.set_in_domain(x, a, true);
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            for (int a : doms[x])
                for (int b : doms[y]) g.set_pair(x, y, a, b, true);
    g.reset_diagonals();
    return g;
}

inline void set_constraint(BinaryInstance& g, int x, int y, const std::vector<std::pair<int, int>>& pairs) {
    for (int a = 0; a < g.universe_size(); ++a)
        for (int b = 0; b < g.universe_size(); ++b) g.set_pair(x, y, a, b, false);
    for (auto [a, b] : pairs) g.set_pair(x, y, a, b, true);
}

// Random syntactically simple binary instance; each pair allowed with
// probability `p`.
inline BinaryInstance random_binary(std::mt19937_64& rng, int n, int u, double p) {
    std::bernoulli_distribution keep(p), in_dom(0.8);
    BinaryInstance g(n, u);
    for (int x = 0; x < n; ++x) {
        bool any = false;
        for (int a = 0; a < u; ++a)
            if (in_dom(rng)) {
                g.set_in_domain(x, a, true);
                any = true;
            }
        if (!any) g.set_in_domain(x, static_cast<int>(rng() % u), true);
    }
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y)
            for (int a = 0; a < u; ++a)
                for (int b = 0; b < u; ++b)
                    if (g.in_domain(x, a) && g.in_domain(y, b) && keep(rng)) g.set_pair(x, y, a, b, true);
    g.reset_diagonals();
    return g;
}

// Random instance with constraints of arity 1..max_arity over random
// relations (scopes may repeat variables).
inline Instance random_instance(std::mt19937_64& rng, int n, int u, int max_arity, int constraints, double density) {
    Instance inst(u, n);
    std::bernoulli_distribution keep(density);
    for (int c = 0; c < constraints; ++c) {
        int k = 1 + static_cast<int>(rng() % max_arity);
        std::vector<int> scope(k);
        for (auto& v : scope) v = static_cast<int>(rng() % n);
        std::vector<Tuple> ts;
        Tuple t(k, 0);
        for (;;) {
            if (keep(rng)) ts.push_back(t);
            int i = k - 1;
            while (i >= 0 && ++t[i] == u) t[i--] = 0;
            if (i < 0) break;
        }
        inst.add_constraint(scope, Relation("", k, ts));
    }
    return inst;
}

// Random operation tables of the given arities, idempotent when asked.
inline FiniteAlgebra random_algebra(std::mt19937_64& rng, int n, const std::vector<int>& arities, bool idempotent) {
    FiniteAlgebra a;
    a.size = n;
    a.idempotent = idempotent;
    for (std::size_t i = 0; i < arities.size(); ++i) {
        a.operations.push_back(table_op("o" + std::to_string(i), arities[i], n, [&](const std::vector<int>& v) {
            if (idempotent && std::all_of(v.begin(), v.end(), [&](int x) { return x == v[0]; })) return v[0];
            return static_cast<int>(rng() % n);
        }));
    }
    return a;
}

// Affine operation of Z_p x Z_q on codes a*q + b.
inline FiniteAlgebra zz(int p, int q) { return product(z(p), z(q)); }

} // namespace fx
