#pragma once

// Reference computations written independently of the library internals:
// plain enumeration and textbook elimination only.

#include <cstdint>
#include <set>
#include <vector>

#include "mcsp/algebra.hpp"
#include "mcsp/structures.hpp"

namespace ref {

using Partition = std::vector<int>;  // block label per element, restricted growth form

// Every partition of {0..n-1} as a restricted growth string.
inline std::vector<Partition> all_partitions(int n) {
    std::vector<Partition> out;
    Partition p(n, 0);
    std::vector<int> maxp(n, 0);
    for (;;) {
        out.push_back(p);
        int i = n - 1;
        while (i > 0 && p[i] == maxp[i - 1] + 1) --i;
        if (i <= 0) break;
        ++p[i];
        maxp[i] = std::max(maxp[i - 1], p[i]);
        for (int j = i + 1; j < n; ++j) {
            p[j] = 0;
            maxp[j] = maxp[i];
        }
    }
    return out;
}

// Compatibility by scanning every pair of related argument tuples.
inline bool compatible(const mcsp::FiniteAlgebra& alg, const Partition& p) {
    const int n = alg.size;
    for (const auto& op : alg.operations) {
        const int k = op.arity;
        std::vector<int> x(k, 0), y(k, 0);
        for (;;) {
            bool related = true;
            for (int i = 0; i < k; ++i) related &= p[x[i]] == p[y[i]];
            if (related) {
                std::size_t ix = 0, iy = 0;
                for (int i = 0; i < k; ++i) {
                    ix = ix * n + x[i];
                    iy = iy * n + y[i];
                }
                if (p[op.table[ix]] != p[op.table[iy]]) return false;
            }
            int i = k - 1;
            while (i >= 0) {
                if (++y[i] < n) break;
                y[i] = 0;
                if (++x[i] < n) break;
                x[i--] = 0;
            }
            if (i < 0) break;
        }
    }
    return true;
}

inline std::vector<Partition> congruences(const mcsp::FiniteAlgebra& alg) {
    std::vector<Partition> out;
    for (const auto& p : all_partitions(alg.size))
        if (compatible(alg, p)) out.push_back(p);
    return out;
}

// Least closed superset by repeated full sweeps over all argument tuples.
inline std::set<int> closure(const mcsp::FiniteAlgebra& alg, std::set<int> s) {
    for (bool grew = true; grew;) {
        grew = false;
        std::vector<int> cur(s.begin(), s.end());
        for (const auto& op : alg.operations) {
            std::vector<std::size_t> pick(op.arity, 0);
            for (;;) {
                std::size_t idx = 0;
                for (int i = 0; i < op.arity; ++i) idx = idx * alg.size + cur[pick[i]];
                grew |= s.insert(op.table[idx]).second;
                int i = op.arity - 1;
                while (i >= 0 && ++pick[i] == cur.size()) pick[i--] = 0;
                if (i < 0) break;
            }
        }
    }
    return s;
}

// Two-variable equations x_to - x_from = offset (mod p), plus pins x_v = a.
struct ModEquation {
    int from, to, offset;
};

// Gaussian elimination over GF(p); true iff the system is consistent.
inline bool gauss_consistent(int p, int n, const std::vector<ModEquation>& eqs, const std::vector<std::pair<int, int>>& pins) {
    auto inv = [&](int a) {
        for (int b = 1; b < p; ++b)
            if (a * b % p == 1) return b;
        return 0;
    };
    std::vector<std::vector<int>> rows;  // n coefficients then the right-hand side
    for (const auto& e : eqs) {
        std::vector<int> r(n + 1, 0);
        r[e.to] = (r[e.to] + 1) % p;
        r[e.from] = (r[e.from] + p - 1) % p;
        r[n] = ((e.offset % p) + p) % p;
        rows.push_back(r);
    }
    for (auto [v, a] : pins) {
        std::vector<int> r(n + 1, 0);
        r[v] = 1;
        r[n] = a % p;
        rows.push_back(r);
    }
    std::size_t rank = 0;
    for (int col = 0; col < n && rank < rows.size(); ++col) {
        std::size_t piv = rank;
        while (piv < rows.size() && rows[piv][col] == 0) ++piv;
        if (piv == rows.size()) continue;
        std::swap(rows[piv], rows[rank]);
        int iv = inv(rows[rank][col]);
        for (auto& v : rows[rank]) v = v * iv % p;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == rank || rows[r][col] == 0) continue;
            int f = rows[r][col];
            for (int c = 0; c <= n; ++c) rows[r][c] = ((rows[r][c] - f * rows[rank][c]) % p + p) % p;
        }
        ++rank;
    }
    for (const auto& r : rows) {
        bool zero = true;
        for (int c = 0; c < n; ++c) zero &= r[c] == 0;
        if (zero && r[n] != 0) return false;
    }
    return true;
}

// Closed subuniverses of an algebra, by closing every subset.
inline std::set<std::vector<int>> all_subuniverses(const mcsp::FiniteAlgebra& alg) {
    std::set<std::vector<int>> out;
    for (std::uint32_t mask = 1; mask < (1u << alg.size); ++mask) {
        std::set<int> s;
        for (int i = 0; i < alg.size; ++i)
            if (mask >> i & 1) s.insert(i);
        auto c = closure(alg, s);
        if (c == s) out.insert(std::vector<int>(s.begin(), s.end()));
    }
    return out;
}

// Brute-force satisfiability of a binary instance over its domains.
inline bool binary_satisfiable(const mcsp::BinaryInstance& g) {
    const int n = g.num_variables();
    std::vector<int> val(n, -1);
    std::vector<std::vector<int>> doms(n);
    for (int x = 0; x < n; ++x) doms[x] = g.domain(x);
    auto go = [&](auto&& self, int x) -> bool {
        if (x == n) return true;
        for (int a : doms[x]) {
            bool ok = g.allows(x, x, a, a);
            for (int y = 0; y < x && ok; ++y) ok = g.allows(y, x, val[y], a);
            if (!ok) continue;
            val[x] = a;
            if (self(self, x + 1)) return true;
        }
        return false;
    };
    return go(go, 0);
}

} // namespace ref
