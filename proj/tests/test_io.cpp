#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>

#include "support/fixtures.hpp"

using namespace mcsp;
namespace fs = std::filesystem;

namespace {

const char* kZ2 = R"(# affine Z_2
universe 2
operation m 3
0 0 0 -> 0
0 0 1 -> 1
0 1 0 -> 1
0 1 1 -> 0
1 0 0 -> 1
1 0 1 -> 0
1 1 0 -> 0
1 1 1 -> 1
end
flag idempotent
flag taylor m(x1,x2,x3)
)";

std::string error_of(auto&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

fs::path corpus_dir() {
    const char* env = std::getenv("MCSP_CORPUS");
    return env ? fs::path(env) : fs::path("corpus");
}

} // namespace

TEST_CASE("parse_algebra", "[io]") {
    FiniteAlgebra a = parse_algebra(kZ2);
    REQUIRE(a.operations.size() == 1);
    CHECK(a.operations[0].table.size() == 8);
    CHECK(a.operations[0] == fx::z(2).operations[0]);
    CHECK(a.idempotent);
    REQUIRE(a.taylor_term);
    CHECK(parse_algebra(serialize_algebra(a)) == a);

    std::string bad = kZ2;
    bad.replace(bad.find("0 0 0 -> 0"), 10, "0 0 0 -> 1");
    CHECK_THAT(error_of([&] { parse_algebra(bad); }), Catch::Matchers::StartsWith("idempotence violated at x=0"));

    CHECK(error_of([] { parse_algebra("universe 2\noperation f 2\n0 0 -> 0\n0 1 -> 2\nend\n"); }) ==
          "line 4: value 2 outside the universe");
    CHECK(error_of([] { parse_algebra("universe 2\noperation f 2\n0 0 -> 0\nend\n"); }) == "line 4: operation 'f' table is not total");
    CHECK(error_of([] { parse_algebra("universe 2\nflag colour\n"); }) == "line 2: unknown flag 'colour'");
    CHECK_THAT(error_of([] { parse_algebra(std::string(kZ2).replace(std::string(kZ2).find("flag taylor"), 28, "flag taylor m(x1,x1,x2)")); }),
               Catch::Matchers::ContainsSubstring("Taylor identities fail"));
}

TEST_CASE("parse_template and parse_instance", "[io]") {
    RelationalTemplate t = parse_template("domain 3\nrelation neq 2\n0 1\n0 2\n1 0\n1 2\n2 0\n2 1\nend\n");
    CHECK(t.relations.at(0) == fx::neq(3));
    CHECK(parse_template(serialize_template(t)) == t);

    Instance inst = parse_instance("vars 3\nconstraint neq 1 2\nconstraint neq 2 3\nconstraint neq 1 3\n", &t);
    CHECK(brute_force_solve(inst, OracleMode::Count).count == 6);

    CHECK(error_of([] { parse_template("domain 2\nrelation r 2\n0 1\n1 2\nend\n"); }) == "line 4: tuple entry 2 outside the universe");
    CHECK(error_of([] { parse_instance("universe 2\nvars 2\nconstraint r 1 2\n"); }) == "line 3: unknown relation 'r'");
    CHECK(error_of([] { parse_instance("universe 2\nvars 2\ninline 2 1 3\n0 1\nend\n"); }) == "line 3: variable 3 out of range");
    CHECK(error_of([] { parse_instance("vars 2\n"); }) == "line 1: universe unknown: give 'universe <n>' or a template");

    Instance named = parse_instance("universe 2\nvars 2\nvarname 1 left\ndomainof 2 1\ninline 2 1 2\n0 1\n1 1\nend\n");
    CHECK(named.variable_names[0] == "left");
    CHECK(named.domains[1] == std::vector<int>{1});
    Instance again = parse_instance(serialize_instance(named));
    CHECK(serialize_instance(again) == serialize_instance(named));
}

TEST_CASE("corpus files round-trip", "[io]") {
    const fs::path dir = corpus_dir();
    REQUIRE(fs::is_directory(dir));
    const std::optional<RelationalTemplate> tmpl = load_template((dir / "three_colouring.tmpl").string());
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string path = entry.path().string();
        const std::string ext = entry.path().extension().string();
        INFO(path);
        if (ext == ".alg") {
            FiniteAlgebra a = load_algebra(path);
            CHECK(parse_algebra(serialize_algebra(a)) == a);
            ++seen;
        } else if (ext == ".inst") {
            const bool templated = entry.path().stem() == "three_colouring";
            Instance i = load_instance(path, templated ? &*tmpl : nullptr);
            Instance back = parse_instance(serialize_instance(i));
            CHECK(serialize_instance(back) == serialize_instance(i));
            CHECK(brute_force_solve(back, OracleMode::Count).count == brute_force_solve(i, OracleMode::Count).count);
            ++seen;
        }
    }
    CHECK(seen >= 10);
}

TEST_CASE("corpus decisions", "[io]") {
    const fs::path dir = corpus_dir();
    RelationalTemplate t = load_template((dir / "three_colouring.tmpl").string());
    CHECK(brute_force_solve(load_instance((dir / "three_colouring.inst").string(), &t), OracleMode::Count).count == 6);
    CHECK_FALSE(oracle_satisfiable(load_instance((dir / "xor_triangle.inst").string())));
    CHECK(oracle_satisfiable(load_instance((dir / "z3_triangle.inst").string())));
    CHECK_FALSE(oracle_satisfiable(load_instance((dir / "z5_cycle.inst").string())));
    CHECK(brute_force_solve(load_instance((dir / "parity_chain.inst").string()), OracleMode::Count).count == 4);
}

TEST_CASE("save and load", "[io]") {
    const fs::path tmp = fs::temp_directory_path() / "mcsp_io_test";
    fs::create_directories(tmp);
    save_instance((tmp / "x.inst").string(), fx::xor_triangle());
    save_algebra((tmp / "x.alg").string(), fx::z(2));
    CHECK(serialize_instance(load_instance((tmp / "x.inst").string())) == serialize_instance(fx::xor_triangle()));
    CHECK(load_algebra((tmp / "x.alg").string()) == fx::z(2));
    BinaryInstance g = binary_from_instance(fx::xor_triangle());
    save_binary((tmp / "b.inst").string(), g);
    CHECK(binary_from_instance(load_instance((tmp / "b.inst").string())) == g);
    CHECK_THROWS_AS(load_instance((tmp / "missing.inst").string()), InvalidInput);
    fs::remove_all(tmp);
}

TEST_CASE("generate", "[io]") {
    Generated tri = generate({Family::AffineLinear, 2, 3, 1.0, 1});
    Instance& inst = tri.instance;
    REQUIRE(inst.constraints.size() == 3);
    // Offsets drawn for (1,2), (1,3), (2,3): 0, 0, 1. Their parity is odd.
    std::vector<std::pair<std::vector<int>, std::string>> got;
    for (const auto& c : inst.constraints) got.push_back({c.scope, inst.relations[c.relation].name});
    CHECK(got == std::vector<std::pair<std::vector<int>, std::string>>{{{0, 1}, "shift0"}, {{0, 2}, "shift0"}, {{1, 2}, "shift1"}});
    CHECK_FALSE(oracle_satisfiable(inst));
    CHECK(tri.algebra == fx::z(2));

    Generated empty = generate({Family::AffineLinear, 3, 4, 0.0, 9});
    CHECK(empty.instance.constraints.empty());
    CHECK(oracle_satisfiable(empty.instance));

    for (auto fam : {Family::AffineLinear, Family::MixedColoured}) {
        GeneratorConfig cfg{fam, 3, 5, 0.5, 77};
        CHECK(serialize_instance(generate(cfg).instance) == serialize_instance(generate(cfg).instance));
        CHECK(serialize_algebra(generate(cfg).algebra) == serialize_algebra(generate(cfg).algebra));
    }
    Generated mixed = generate({Family::MixedColoured, 3, 4, 0.5, 5});
    CHECK(mixed.algebra.size == 5);
    CHECK_NOTHROW(check_algebra_preserves(mixed.instance, mixed.algebra));

    CHECK_THROWS_AS(generate({Family::AffineLinear, 1, 3, 0.5, 1}), InvalidInput);
    CHECK_THROWS_AS(generate({Family::AffineLinear, 2, 3, 1.5, 1}), InvalidInput);
    CHECK(parse_family("mixed") == Family::MixedColoured);
    CHECK_THROWS_AS(parse_family("cubic"), InvalidInput);
}
