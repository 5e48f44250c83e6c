#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace mcsp::cli;

int main(int argc, char** argv) {
    CLI::App app{"Solver for Maltsev constraint problems with core multiconsistency graphs"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--cap", g.cap, "node cap for the brute-force oracle")->envname("MCSP_CAP");
    app.add_option("--depth", g.depth, "term depth for edge colouring")->check(CLI::Range(1, 4));
    app.add_flag("--assume-core", g.assume_core, "skip the core check");
    app.add_option("--seed", g.seed, "seed for generation");
    app.add_option("--template", g.template_path, "template file supplying relation names to instances");

    std::string inst, alg, out, alg_out, batch, family = "affine-linear", prefix, out_dir;
    bool certificate = false, count = false, all = false, trace = false;
    std::optional<std::uint64_t> seed_zero;
    std::vector<std::string> algs;
    std::vector<int> explain;
    int modulus = 2, vars = 4, core_cap = 12, gen_count = 1;
    double density = 0.5;

    auto* solve = app.add_subcommand("solve", "decide an instance");
    solve->add_option("instance", inst)->required();
    solve->add_option("--algebra", alg, "algebra of polymorphisms")->required();
    solve->add_flag("--certificate", certificate, "print the refutation on UNSAT");
    solve->add_option("--seed-zero", seed_zero, "pick group zeros at random with this seed");

    auto* oracle = app.add_subcommand("oracle", "brute-force search");
    oracle->add_option("instance", inst)->required();
    auto* count_flag = oracle->add_flag("--count", count, "print the number of solutions");
    oracle->add_flag("--all", all, "print every solution")->excludes(count_flag);

    auto* compare = app.add_subcommand("compare", "check the solver against the oracle");
    compare->add_option("instance", inst);
    compare->add_option("--algebra", alg, "algebra (shared by all instances in batch mode)");
    compare->add_option("--batch", batch, "directory of .inst files, each with a .alg of the same stem");

    auto* bin = app.add_subcommand("binarize", "write the binary encoding of an instance");
    bin->add_option("instance", inst)->required();
    bin->add_option("-o", out, "output instance file")->required();
    bin->add_option("--algebra", alg, "algebra to lift to tuple variables");
    bin->add_option("--algebra-out", alg_out, "where to write the lifted algebra");

    auto* prop = app.add_subcommand("propagate", "run (1,2)-consistency on a binary instance");
    prop->add_option("instance", inst)->required();
    prop->add_flag("--trace", trace, "print every removal");

    auto* red = app.add_subcommand("reduce", "type reduction on a binary instance");
    red->add_option("instance", inst)->required();
    red->add_option("--algebras", algs, "one algebra, or one per variable")->required();
    red->add_option("--explain", explain, "reason chain for a removed value: <var> <val>")->expected(2);

    auto* col = app.add_subcommand("colour", "coloured graph of an algebra");
    col->add_option("algebra", alg)->required();

    auto* core = app.add_subcommand("core-check", "is the multiconsistency graph a core");
    core->add_option("instance", inst)->required();
    core->add_option("--max-domain", core_cap, "largest domain size searched");

    auto* gen = app.add_subcommand("gen", "seeded random instances");
    gen->add_option("--family", family, "affine-linear | mixed-coloured");
    gen->add_option("--modulus", modulus, "group order q");
    gen->add_option("--vars", vars, "number of variables");
    gen->add_option("--density", density, "probability of a constraint per pair");
    gen->add_option("-o", prefix, "write <prefix>.inst and <prefix>.alg");
    gen->add_option("--count", gen_count, "number of instances with --out-dir");
    gen->add_option("--out-dir", out_dir, "directory for gen_NNNN.{inst,alg}");

    for (auto* sub : {solve, oracle, compare, bin, prop, red, col, core, gen}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitError;
    }

    try {
        if (*solve) return cmd_solve(g, inst, alg, certificate, seed_zero);
        if (*oracle) return cmd_oracle(g, inst, count, all);
        if (*compare) return cmd_compare(g, inst, alg, batch);
        if (*bin) return cmd_binarize(g, inst, out, alg, alg_out);
        if (*prop) return cmd_propagate(g, inst, trace);
        if (*red) return cmd_reduce(g, inst, algs, explain);
        if (*col) return cmd_colour(g, alg);
        if (*core) return cmd_core_check(g, inst, core_cap);
        if (*gen) return cmd_gen(g, family, modulus, vars, density, prefix, gen_count, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
