#include <catch2/catch_amalgamated.hpp>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace mcsp;

namespace {

using Pairs = std::vector<std::pair<int, int>>;

BinaryInstance graph_of(const Instance& inst) { return binarize(inst).graph; }

Instance with_constraints(int q, int n, const std::vector<std::tuple<int, int, int>>& shifts) {
    Instance inst(q, n);
    for (auto [i, j, c] : shifts) inst.add_constraint({i, j}, Relation("shift" + std::to_string(c), 2, shift_relation(q, c).tuples));
    return inst;
}

// Closed subdirect subuniverses of Z_p x Z_q, listed by brute force.
std::vector<Pairs> closed_subdirect(int p, int q) {
    FiniteAlgebra prod = fx::zz(p, q);
    std::vector<Pairs> out;
    for (unsigned mask = 1; mask < (1u << (p * q)); ++mask) {
        std::vector<int> set;
        for (int c = 0; c < p * q; ++c)
            if (mask >> c & 1) set.push_back(c);
        if (!is_subuniverse(prod, set)) continue;
        Pairs pairs;
        std::set<int> l, r;
        for (int c : set) {
            pairs.emplace_back(c / q, c % q);
            l.insert(c / q);
            r.insert(c % q);
        }
        if (static_cast<int>(l.size()) == p && static_cast<int>(r.size()) == q) out.push_back(pairs);
    }
    return out;
}

std::vector<int> upto(int n) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

Pairs reconstruct(const ConstraintClass& c, const std::vector<int>& left, const std::vector<int>& right) {
    Pairs out;
    if (c.kind == LinkKind::FullProduct) {
        for (int a : left)
            for (int b : right) out.emplace_back(a, b);
    } else {
        for (std::size_t i = 0; i < c.theta.blocks.size(); ++i)
            for (int a : c.theta.blocks[i]) out.emplace_back(a, c.iso[i]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("classify_constraint", "[affine]") {
    ConstraintClass full = classify_constraint({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1}, {0, 1});
    CHECK(full.kind == LinkKind::FullProduct);

    ConstraintClass id = classify_constraint({{0, 0}, {1, 1}}, {0, 1}, {0, 1});
    CHECK(id.kind == LinkKind::IsoGraph);
    CHECK(id.theta.is_diagonal());
    CHECK(id.iso == std::vector<int>{0, 1});

    ConstraintClass half = classify_constraint({{0, 0}, {1, 0}, {2, 1}, {3, 1}}, {0, 1, 2, 3}, {0, 1});
    CHECK(half.kind == LinkKind::IsoGraph);
    CHECK(half.theta.blocks == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
    CHECK(half.iso == std::vector<int>{0, 1});

    CHECK_THROWS_WITH(classify_constraint({{0, 0}, {0, 1}, {1, 1}}, {0, 1}, {0, 1}), "link dichotomy violated");
}

TEST_CASE("link dichotomy holds exhaustively on small affine squares", "[affine][property]") {
    for (int p : {2, 3}) {
        auto subs = closed_subdirect(p, p);
        CHECK(subs.size() == static_cast<std::size_t>(p == 2 ? 3 : 7));
        for (const auto& c : subs) {
            ConstraintClass cls = classify_constraint(c, upto(p), upto(p));
            CHECK(reconstruct(cls, upto(p), upto(p)) == c);
        }
    }
    // Z_4 on the left, simple Z_2 on the right.
    for (const auto& c : closed_subdirect(4, 2)) CHECK(reconstruct(classify_constraint(c, upto(4), upto(2)), upto(4), upto(2)) == c);
}

TEST_CASE("closed subdirect products of affine factors are rectangular", "[affine][property]") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 100; ++trial) {
        const int p = 2 + static_cast<int>(rng() % 4), q = 2 + static_cast<int>(rng() % 4);
        FiniteAlgebra prod = fx::zz(p, q);
        std::vector<int> seed;
        for (int k = 0; k < 1 + static_cast<int>(rng() % 3); ++k) seed.push_back(static_cast<int>(rng() % (p * q)));
        Pairs pairs;
        for (int c : subalgebra_generated(prod, seed)) pairs.emplace_back(c / q, c % q);
        CHECK(is_rectangular(pairs));
    }
}

TEST_CASE("domain_group", "[affine]") {
    SECTION("composite isomorphisms") {
        Instance inst = with_constraints(2, 3, {{0, 1, 1}, {1, 2, 1}});
        BinaryInstance g = graph_of(inst);
        DomainGroup dg = domain_group(g, fx::z(2), 0, {0, 1}, diagonal_congruence({0, 1}));
        REQUIRE(dg.members.size() == 3);
        CHECK(dg.member(1).label == std::vector<int>{1, 0});
        CHECK(dg.member(2).label == std::vector<int>{0, 1});
        CHECK(dg.member(2).parent == dg.member_of[1]);
    }
    SECTION("full products stay outside") {
        BinaryInstance g = graph_of(Instance(3, 3));
        DomainGroup dg = domain_group(g, fx::z(3), 1, {0, 1, 2}, diagonal_congruence({0, 1, 2}));
        REQUIRE(dg.members.size() == 1);
        CHECK(dg.members[0].var == 1);
        CHECK(dg.member_of == std::vector<int>{-1, 0, -1});
    }
    SECTION("identity link") {
        BinaryInstance g = graph_of(with_constraints(3, 2, {{0, 1, 0}}));
        DomainGroup dg = domain_group(g, fx::z(3), 0, {0, 1, 2}, diagonal_congruence({0, 1, 2}));
        REQUIRE(dg.members.size() == 2);
        CHECK(dg.member(1).label == std::vector<int>{0, 1, 2});
        CHECK(dg.group == AbelianGroup::cyclic(3));
    }
    SECTION("quotient anchor") {
        BinaryInstance g = fx::binary(2, 4, {{0, 1, 2, 3}, {0, 1, 2, 3}});
        fx::set_constraint(g, 0, 1, {{0, 0}, {1, 0}, {2, 1}, {3, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 3}});
        Congruence theta{{0, 1, 2, 3}, {{0, 2}, {1, 3}}, true};
        DomainGroup dg = domain_group(g, fx::z(4), 0, {0, 1, 2, 3}, theta);
        CHECK(dg.group.order == 2);
    }
    SECTION("non-affine anchors are rejected") {
        BinaryInstance g = fx::binary(1, 2, {{0, 1}});
        CHECK_THROWS_AS(domain_group(g, fx::majority2(), 0, {0, 1}, diagonal_congruence({0, 1})), InvalidInput);
    }
}

TEST_CASE("encode_linear_system", "[affine]") {
    SECTION("parity triangle") {
        BinaryInstance g = graph_of(fx::xor_triangle());
        DomainGroup dg = domain_group(g, fx::z(2), 0, {0, 1}, diagonal_congruence({0, 1}));
        LinearSystem sys = encode_linear_system(dg, g);
        REQUIRE(sys.equations.size() == 3);
        for (const auto& e : sys.equations) CHECK(e.offset == 1);
        CHECK_FALSE(solve_linear_system(sys).sat);
    }
    SECTION("identity edge") {
        BinaryInstance g = graph_of(with_constraints(3, 2, {{0, 1, 0}}));
        DomainGroup dg = domain_group(g, fx::z(3), 0, {0, 1, 2}, diagonal_congruence({0, 1, 2}));
        LinearSystem sys = encode_linear_system(dg, g);
        REQUIRE(sys.equations.size() == 1);
        CHECK(sys.equations[0].offset == 0);
    }
    SECTION("full chord") {
        BinaryInstance g = graph_of(with_constraints(3, 3, {{0, 1, 1}, {1, 2, 2}}));
        DomainGroup dg = domain_group(g, fx::z(3), 0, {0, 1, 2}, diagonal_congruence({0, 1, 2}));
        CHECK(dg.members.size() == 3);
        CHECK(encode_linear_system(dg, g).equations.size() == 2);
    }
}

TEST_CASE("sharp_L_check", "[affine]") {
    BinaryInstance odd = graph_of(fx::xor_triangle());
    for (int x = 0; x < 3; ++x)
        for (int a = 0; a < 2; ++a) {
            SharpLResult r = sharp_L_check(odd, fx::z(2), x, a);
            CHECK_FALSE(r.pass);
            REQUIRE(r.certificate);
            CHECK(verify_certificate(*r.system, *r.certificate));
        }

    BinaryInstance tree = graph_of(with_constraints(3, 4, {{0, 1, 1}, {0, 2, 2}, {2, 3, 1}}));
    CHECK(sharp_L_check(tree, fx::z(3), 0, 0).pass);

    BinaryInstance two = graph_of(with_constraints(5, 2, {{0, 1, 2}}));
    SharpLResult r = sharp_L_check(two, fx::z(5), 0, 3);
    CHECK(r.pass);

    CHECK(simple_affine_subuniverses(fx::z(4), {0, 1, 2, 3}, 0) == std::vector<std::vector<int>>{{0, 2}});
    CHECK(subuniverses_containing(fx::z(3), {0, 1, 2}, 1) == std::vector<std::vector<int>>{{1}, {0, 1, 2}});
}

TEST_CASE("solve", "[affine]") {
    SECTION("parity triangle is refuted") {
        SolveResult r = solve(fx::xor_triangle(), fx::z(2));
        CHECK_FALSE(r.sat);
        REQUIRE(r.certificate);
        REQUIRE(r.system);
        CHECK(verify_certificate(*r.system, *r.certificate));
    }
    SECTION("Z_3 triangle is solved") {
        SolveOptions opts;
        opts.assume_core = true;
        Instance inst = fx::shift_triangle(3, 1);
        SolveResult r = solve(inst, fx::z(3), opts);
        REQUIRE(r.sat);
        CHECK(evaluate_assignment(inst, r.assignment));
        CHECK(r.assignment[1] == (r.assignment[0] + 1) % 3);
    }
    SECTION("non-core graphs need an explicit assumption") {
        CHECK_THROWS_WITH(solve(fx::shift_triangle(3, 1), fx::z(3)), Catch::Matchers::StartsWith("multiconsistency graph is not a core"));
    }
    SECTION("algebras must preserve the relations") {
        SolveOptions opts;
        opts.assume_core = true;
        CHECK_THROWS_AS(solve(fx::three_colouring_triangle(), fx::z(3), opts), InvalidInput);
    }
    SECTION("random Z_5 system") {
        Generated gen = generate({Family::AffineLinear, 5, 6, 0.5, 42});
        SolveOptions opts;
        opts.assume_core = true;
        SolveResult r = solve(gen.instance, gen.algebra, opts);
        CHECK(r.sat == oracle_satisfiable(gen.instance));
        if (r.sat) CHECK(evaluate_assignment(gen.instance, r.assignment));
    }
}

TEST_CASE("solve agrees with the oracle on generated families", "[affine][property]") {
    std::mt19937_64 rng(53);
    SolveOptions opts;
    opts.assume_core = true;
    for (int trial = 0; trial < 60; ++trial) {
        GeneratorConfig cfg;
        cfg.family = trial % 3 == 0 ? Family::MixedColoured : Family::AffineLinear;
        cfg.modulus = 2 + static_cast<int>(rng() % 4);
        cfg.num_variables = 2 + static_cast<int>(rng() % 4);
        cfg.density = 0.3 + 0.1 * static_cast<double>(rng() % 8);
        cfg.seed = rng();
        Generated gen = generate(cfg);
        // Yellow elimination is only sound on cores; see the next case.
        const auto edges = coloured_graph(gen.algebra).edges;
        if (std::any_of(edges.begin(), edges.end(), [](const EdgeColour& e) { return e.colour == Colour::Yellow; })) continue;
        SolveResult r = solve(gen.instance, gen.algebra, opts);
        CHECK(r.sat == oracle_satisfiable(gen.instance));
        if (r.sat) CHECK(evaluate_assignment(gen.instance, r.assignment));
    }
}

TEST_CASE("an assumed core with a majority domain is refuted by yellow elimination", "[affine]") {
    Instance inst(3, 2);
    inst.domains[1] = {1, 2};
    inst.add_constraint({0, 1}, Relation("full", 2, {{0, 1}, {0, 2}, {1, 1}, {1, 2}}));
    FiniteAlgebra alg = fx::single(3, fx::table_op("g", 3, 3, [](const std::vector<int>& v) {
        if (v[0] == v[1] || v[0] == v[2]) return v[0];
        return v[1] == v[2] ? v[1] : v[0];
    }));
    REQUIRE(oracle_satisfiable(inst));
    SolveOptions opts;
    opts.assume_core = true;
    SolveResult r = solve(inst, alg, opts);
    CHECK_FALSE(r.sat);
    CHECK(std::any_of(r.trace.begin(), r.trace.end(), [](const Removal& rm) { return rm.reason == "yellow"; }));
    CHECK_THROWS_WITH(solve(inst, alg), Catch::Matchers::StartsWith("multiconsistency graph is not a core"));
}

TEST_CASE("solve handles ternary affine constraints", "[affine]") {
    // x + y + z = c over Z_2, chained over five variables.
    std::mt19937_64 rng(59);
    SolveOptions opts;
    opts.assume_core = true;
    for (int trial = 0; trial < 10; ++trial) {
        Instance inst(2, 4);
        std::vector<Tuple> even, odd;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c) ((a + b + c) % 2 ? odd : even).push_back({a, b, c});
        int r0 = inst.add_relation(Relation("even", 3, even)), r1 = inst.add_relation(Relation("odd", 3, odd));
        for (int k = 0; k < 2; ++k) {
            std::vector<int> scope{static_cast<int>(rng() % 4), static_cast<int>(rng() % 4), static_cast<int>(rng() % 4)};
            inst.add_constraint(scope, rng() % 2 ? r0 : r1);
        }
        SolveResult r = solve(inst, fx::z(2), opts);
        CHECK(r.sat == oracle_satisfiable(inst));
        if (r.sat) CHECK(evaluate_assignment(inst, r.assignment));
    }
}

TEST_CASE("the decision does not depend on the zero choice", "[affine][property]") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        Generated gen = generate({Family::AffineLinear, 3 + static_cast<int>(seed % 3), 5, 0.6, seed});
        SolveOptions base;
        base.assume_core = true;
        const bool expect = solve(gen.instance, gen.algebra, base).sat;
        for (std::uint64_t z = 1; z <= 5; ++z) {
            SolveOptions o = base;
            o.zero_seed = z;
            SolveResult r = solve(gen.instance, gen.algebra, o);
            CHECK(r.sat == expect);
            if (r.sat) CHECK(evaluate_assignment(gen.instance, r.assignment));
        }
    }
}

TEST_CASE("domain groups are path independent when the sweep passes", "[affine][property]") {
    // A planted assignment makes every cycle consistent; each member's
    // labels must then agree with every in-group constraint.
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 30; ++trial) {
        const int q = 2 + static_cast<int>(rng() % 4), n = 3 + static_cast<int>(rng() % 4);
        std::vector<int> planted(n);
        for (auto& v : planted) v = static_cast<int>(rng() % q);
        std::vector<std::tuple<int, int, int>> shifts;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng() % 2) shifts.emplace_back(i, j, ((planted[j] - planted[i]) % q + q) % q);
        BinaryInstance g = graph_of(with_constraints(q, n, shifts));
        DomainGroup dg = domain_group(g, fx::z(q), 0, upto(q), diagonal_congruence(upto(q)));
        for (auto [i, j, c] : shifts) {
            if (dg.member_of[i] < 0 || dg.member_of[j] < 0) continue;
            for (int a = 0; a < q; ++a) CHECK(dg.member(j).label[(a + c) % q] == dg.member(i).label[a]);
        }
        CHECK(solve_linear_system(encode_linear_system(dg, g)).sat);
    }
}
