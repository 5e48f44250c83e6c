#include <catch2/catch_amalgamated.hpp>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace mcsp;

namespace {

Term m_term() { return Term::apply(0, {Term::variable(0), Term::variable(1), Term::variable(2)}); }

Instance ternary_example() {
    Instance inst(2, 3);
    inst.add_constraint({0, 1, 2}, Relation("R", 3, {{0, 1, 1}}));
    return inst;
}

int tuple_index(const VariableMapping& m, std::vector<int> comp) {
    for (auto& c : comp) --c;
    for (std::size_t t = 0; t < m.components.size(); ++t)
        if (m.components[t] == comp) return static_cast<int>(t);
    return -1;
}

} // namespace

TEST_CASE("binarize a single ternary constraint", "[binarize]") {
    BinarizeResult r = binarize(ternary_example());
    const VariableMapping& m = r.mapping;
    CHECK(m.arity == 2);
    REQUIRE(m.components.size() == 9);
    CHECK(m.names()[1] == "t_1_2");
    const int x = tuple_index(m, {1, 2}), y = tuple_index(m, {3, 3});
    CHECK(r.graph.domain(x) == std::vector<int>{0, 1, 2, 3});
    CHECK(r.graph.domain(y) == std::vector<int>{0, 3});
    // (0,1) -> code 1, (1,1) -> code 3
    CHECK(r.graph.pairs(x, y) == std::vector<std::pair<int, int>>{{1, 3}});
    CHECK(check_syntactic_simplicity(r.graph).empty());
}

TEST_CASE("binarize a binary instance intersects parallel constraints", "[binarize]") {
    Instance inst(3, 2);
    inst.add_constraint({0, 1}, fx::neq(3));
    inst.add_constraint({1, 0}, Relation("lt", 2, {{0, 1}, {0, 2}, {1, 2}}));
    BinarizeResult r = binarize(inst);
    CHECK(r.mapping.arity == 1);
    // x2 < x1 and x1 != x2
    CHECK(r.graph.pairs(0, 1) == std::vector<std::pair<int, int>>{{1, 0}, {2, 0}, {2, 1}});
    CHECK(r.graph.pairs(1, 0) == std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});
    CHECK(r.graph.pairs(0, 0) == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {2, 2}});
}

TEST_CASE("binarize turns unary constraints into domains", "[binarize]") {
    Instance inst(3, 2);
    inst.add_constraint({0}, Relation("odd", 1, {{1}}));
    BinarizeResult r = binarize(inst);
    CHECK(r.mapping.arity == 1);
    CHECK(r.graph.domain(0) == std::vector<int>{1});
    CHECK(r.graph.pairs(0, 0) == std::vector<std::pair<int, int>>{{1, 1}});
    CHECK(r.graph.domain(1) == std::vector<int>{0, 1, 2});
}

TEST_CASE("binarize respects repeated scope entries", "[binarize]") {
    Instance inst(2, 1);
    inst.add_constraint({0, 0}, Relation("swap", 2, {{0, 1}, {1, 0}}));
    BinarizeResult r = binarize(inst);
    CHECK(r.graph.domain(0).empty());
}

TEST_CASE("project_solution", "[binarize]") {
    BinarizeResult r = binarize(ternary_example());
    Assignment bsol(9);
    for (std::size_t t = 0; t < 9; ++t) {
        std::vector<int> vals;
        for (int v : r.mapping.components[t]) vals.push_back(std::vector<int>{0, 1, 1}[v]);
        bsol[t] = r.mapping.encode(vals);
    }
    CHECK(project_solution(bsol, r.mapping) == Assignment{0, 1, 1});
    CHECK(evaluate_assignment(ternary_example(), project_solution(bsol, r.mapping)));

    bsol[0] = r.mapping.encode({1, 1});
    CHECK_THROWS_AS(project_solution(bsol, r.mapping), InternalError);

    Instance bin(2, 2);
    BinarizeResult id = binarize(bin);
    CHECK(project_solution({1, 0}, id.mapping) == Assignment{1, 0});
}

TEST_CASE("lift_algebra", "[binarize]") {
    FiniteAlgebra z2 = lift_algebra(fx::z(2), 2);
    CHECK(z2.size == 4);
    // (0,1), (0,0), (1,1) -> (1,0)
    CHECK(z2.apply(0, {1, 0, 3}) == 2);
    CHECK(lift_algebra(fx::z(3), 1) == fx::z(3));
    FiniteAlgebra z3 = lift_algebra(fx::z(3), 2);
    CHECK(z3.size == 9);
    CHECK(check_identities(z3, maltsev_identities(m_term())));
    CHECK_THROWS_AS(lift_algebra(fx::z(5), 6), CapExceeded);
}

TEST_CASE("lift_algebra keeps exactly the identities of the base", "[binarize][property]") {
    Term bin = Term::apply(0, {Term::variable(0), Term::variable(1)});
    std::vector<FiniteAlgebra> algs{fx::z(2), fx::z(3), fx::majority2(), fx::min2(), fx::vee3()};
    for (const auto& alg : algs) {
        const bool ternary = alg.operations[0].arity == 3;
        std::vector<std::vector<Identity>> lists;
        if (ternary) {
            lists = {maltsev_identities(m_term()), majority_identities(m_term()), taylor_identities(m_term(), 3)};
        } else {
            lists = {semilattice_identities(bin), taylor_identities(bin, 2)};
        }
        for (int k : {2, 3}) {
            FiniteAlgebra lifted = lift_algebra(alg, k);
            for (const auto& ids : lists) CHECK(check_identities(lifted, ids) == check_identities(alg, ids));
        }
    }
}

TEST_CASE("binarize preserves satisfiability", "[binarize][property]") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 4), u = 1 + static_cast<int>(rng() % 3);
        Instance inst = fx::random_instance(rng, n, u, 3, 1 + static_cast<int>(rng() % 3), 0.5);
        BinarizeResult r = binarize(inst);
        CHECK(check_syntactic_simplicity(r.graph).empty());
        CHECK(ref::binary_satisfiable(r.graph) == oracle_satisfiable(inst));
    }
}

TEST_CASE("display_names", "[binarize]") {
    Instance inst(2, 3);
    inst.variable_names = {"a", "", "c"};
    CHECK(display_names(inst, binarize(inst).mapping) == std::vector<std::string>{"a", "2", "c"});
    CHECK(display_names(ternary_example(), binarize(ternary_example()).mapping)[1] == "t_1_2");
}
