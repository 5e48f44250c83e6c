#pragma once

// Seeded random instance families. Output depends only on the config: the
// engine is std::mt19937_64 (its sequence is fixed by the standard) and all
// draws go through the helpers below rather than library distributions.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "mcsp/algebra.hpp"
#include "mcsp/structures.hpp"

namespace mcsp {

enum class Family { AffineLinear, MixedColoured };

struct GeneratorConfig {
    Family family = Family::AffineLinear;
    int modulus = 2;
    int num_variables = 3;
    double density = 0.5;
    std::uint64_t seed = 0;

    void validate() const {
        if (modulus < 2) throw InvalidInput("modulus must be at least 2");
        if (num_variables < 1) throw InvalidInput("need at least one variable");
        if (!(density >= 0.0 && density <= 1.0)) throw InvalidInput("density must lie in [0,1]");
        if (family == Family::MixedColoured && num_variables < 2) throw InvalidInput("mixed family needs at least two variables");
    }
};

struct Generated {
    Instance instance;
    FiniteAlgebra algebra;
};

inline Family parse_family(const std::string& s) {
    if (s == "affine-linear") return Family::AffineLinear;
    if (s == "mixed-coloured" || s == "mixed") return Family::MixedColoured;
    throw InvalidInput("unknown family '" + s + "' (affine-linear | mixed-coloured)");
}

namespace detail {

class Draw {
public:
    explicit Draw(std::uint64_t seed) : eng_(seed) {}
    int below(int n) { return static_cast<int>(eng_() % static_cast<std::uint64_t>(n)); }
    bool chance(double p) {
        double x = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
        return x < p;
    }

private:
    std::mt19937_64 eng_;
};

// Affine operation x - y + z on Z_q, extended to a larger universe by the
// first projection.
inline Operation affine_op(int q, int universe, const std::string& name = "m") {
    Operation op{name, 3, std::vector<int>(static_cast<std::size_t>(universe) * universe * universe)};
    for (int x = 0; x < universe; ++x)
        for (int y = 0; y < universe; ++y)
            for (int z = 0; z < universe; ++z) {
                int v = x;
                if (x < q && y < q && z < q) v = ((x - y + z) % q + q) % q;
                op.table[(static_cast<std::size_t>(x) * universe + y) * universe + z] = v;
            }
    return op;
}

} // namespace detail

// Affine algebra Z_q with m(x,y,z) = x - y + z.
inline FiniteAlgebra affine_algebra(int q) {
    FiniteAlgebra a;
    a.size = q;
    a.idempotent = true;
    a.operations.push_back(detail::affine_op(q, q));
    return a;
}

inline Relation shift_relation(int q, int c) {
    std::vector<Tuple> ts;
    for (int a = 0; a < q; ++a) ts.push_back({a, (a + c) % q});
    return Relation("shift" + std::to_string(c), 2, std::move(ts));
}

// Affine-linear: for each pair i < j (lexicographic) a constraint
// x_j = x_i + c with probability `density`, c uniform in Z_q.
// Mixed-coloured: the same over Z_q for all but one planted variable, whose
// domain {q, q+1} carries a semilattice or a majority operation and which is
// linked to the others by full products.
inline Generated generate(const GeneratorConfig& cfg) {
    cfg.validate();
    detail::Draw draw(cfg.seed);
    const int q = cfg.modulus, n = cfg.num_variables;
    Generated out;
    if (cfg.family == Family::AffineLinear) {
        out.algebra = affine_algebra(q);
        out.instance = Instance(q, n);
        std::vector<int> rel_of(q, -1);
        std::vector<std::tuple<int, int, int>> picks;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (draw.chance(cfg.density)) picks.emplace_back(i, j, draw.below(q));
        for (const auto& p : picks) rel_of[std::get<2>(p)] = 0;
        for (int c = 0; c < q; ++c)
            if (rel_of[c] == 0) rel_of[c] = out.instance.add_relation(shift_relation(q, c));
        for (auto [i, j, c] : picks) out.instance.add_constraint({i, j}, rel_of[c]);
        return out;
    }

    const int u = q + 2;
    const int planted = draw.below(n);
    const bool majority = draw.chance(0.5);
    FiniteAlgebra alg;
    alg.size = u;
    alg.idempotent = true;
    Operation m = detail::affine_op(q, u);
    Operation f{"f", 2, std::vector<int>(static_cast<std::size_t>(u) * u)};
    for (int x = 0; x < u; ++x)
        for (int y = 0; y < u; ++y) f.table[static_cast<std::size_t>(x) * u + y] = x;
    const int lo = q, hi = q + 1;
    for (int x : {lo, hi})
        for (int y : {lo, hi}) {
            if (!majority) f.table[static_cast<std::size_t>(x) * u + y] = std::min(x, y);
            for (int z : {lo, hi}) {
                int v = majority ? ((x == y || x == z) ? x : y) : std::min({x, y, z});
                m.table[(static_cast<std::size_t>(x) * u + y) * u + z] = v;
            }
        }
    alg.operations = {m, f};
    if (!majority) alg.redop = "f";
    out.algebra = alg;

    Instance inst(u, n);
    std::vector<int> zq(q);
    for (int a = 0; a < q; ++a) zq[a] = a;
    for (int x = 0; x < n; ++x) inst.domains[x] = x == planted ? std::vector<int>{lo, hi} : zq;
    std::vector<Tuple> link;
    for (int a = 0; a < q; ++a)
        for (int b : {lo, hi}) link.push_back({a, b});
    std::vector<int> rel_of(q, -1);
    std::vector<std::tuple<int, int, int>> picks;  // c = -1 marks a link
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (draw.chance(cfg.density)) picks.emplace_back(i, j, (i == planted || j == planted) ? -1 : draw.below(q));
    int link_rel = -1;
    for (auto [i, j, c] : picks) {
        if (c < 0) {
            if (j == planted && link_rel < 0) link_rel = inst.add_relation(Relation("link", 2, link));
        } else if (rel_of[c] < 0) {
            rel_of[c] = inst.add_relation(shift_relation(q, c));
        }
    }
    std::vector<Tuple> back;
    for (int b : {lo, hi})
        for (int a = 0; a < q; ++a) back.push_back({b, a});
    int back_rel = -1;
    for (auto [i, j, c] : picks) {
        if (c >= 0) {
            inst.add_constraint({i, j}, rel_of[c]);
        } else if (i == planted) {
            if (back_rel < 0) back_rel = inst.add_relation(Relation("link_rev", 2, back));
            inst.add_constraint({i, j}, back_rel);
        } else {
            inst.add_constraint({i, j}, link_rel);
        }
    }
    out.instance = std::move(inst);
    return out;
}

} // namespace mcsp
