#include "commands.hpp"

#include <filesystem>
#include <iostream>

namespace mcsp::cli {

namespace {

mcsp::Instance read_instance(const Globals& g, const std::string& path) {
    if (g.template_path.empty()) return mcsp::load_instance(path);
    mcsp::RelationalTemplate t = mcsp::load_template(g.template_path);
    return mcsp::load_instance(path, &t);
}

mcsp::SolveOptions solve_options(const Globals& g) {
    mcsp::SolveOptions o;
    o.assume_core = g.assume_core;
    o.depth = g.depth;
    return o;
}

} // namespace

int cmd_solve(const Globals& g, const std::string& inst_path, const std::string& alg_path, bool certificate,
              std::optional<std::uint64_t> seed_zero) {
    mcsp::Instance inst = read_instance(g, inst_path);
    mcsp::FiniteAlgebra alg = mcsp::load_algebra(alg_path);
    mcsp::SolveOptions opts = solve_options(g);
    opts.zero_seed = seed_zero;
    mcsp::SolveResult r = mcsp::solve(inst, alg, opts);
    if (r.sat) {
        std::cout << "SAT\n" << mcsp::format_assignment(inst, r.assignment);
        return kExitSat;
    }
    std::cout << "UNSAT\n";
    if (certificate) {
        if (r.certificate && r.system) {
            std::vector<std::string> labels;
            for (int v : r.system_vars) labels.push_back(mcsp::variable_label(r.variable_names, v));
            std::cout << mcsp::format_certificate(*r.system, *r.certificate, labels);
        } else {
            for (const auto& rm : r.trace) std::cout << mcsp::format_removal(rm, r.variable_names) << "\n";
        }
    }
    return kExitUnsat;
}

int cmd_oracle(const Globals& g, const std::string& inst_path, bool count, bool all) {
    mcsp::Instance inst = read_instance(g, inst_path);
    mcsp::OracleMode mode = all ? mcsp::OracleMode::All : count ? mcsp::OracleMode::Count : mcsp::OracleMode::First;
    mcsp::SolutionSet s = mcsp::brute_force_solve(inst, mode, g.cap);
    if (mode == mcsp::OracleMode::Count) {
        std::cout << s.count << "\n";
        return kExitSat;
    }
    if (mode == mcsp::OracleMode::All) {
        std::cout << s.count << " solutions\n";
        for (const auto& sol : s.solutions) {
            for (int x = 0; x < inst.num_variables; ++x) std::cout << (x ? " " : "") << sol[x];
            std::cout << "\n";
        }
        return kExitSat;
    }
    if (s.count == 0) {
        std::cout << "UNSAT\n";
        return kExitUnsat;
    }
    std::cout << "SAT\n" << mcsp::format_assignment(inst, s.solutions.front());
    return kExitSat;
}

int cmd_compare(const Globals& g, const std::string& inst_path, const std::string& alg_path, const std::string& batch) {
    mcsp::CompareOptions opts;
    opts.solve = solve_options(g);
    opts.oracle_cap = g.cap;
    if (!batch.empty()) {
        std::optional<mcsp::FiniteAlgebra> shared;
        if (!alg_path.empty()) shared = mcsp::load_algebra(alg_path);
        mcsp::BatchSummary s = mcsp::compare_batch(batch, shared ? &*shared : nullptr, opts);
        for (const auto& [name, rep] : s.reports) std::cout << name << ": " << rep.line() << "\n";
        std::cout << s.summary_line() << "\n";
        return s.disagree == 0 ? kExitSat : kExitUnsat;
    }
    if (inst_path.empty() || alg_path.empty()) throw mcsp::InvalidInput("compare needs an instance and --algebra, or --batch");
    mcsp::CompareReport rep = mcsp::compare(read_instance(g, inst_path), mcsp::load_algebra(alg_path), opts);
    std::cout << rep.line() << "\n";
    return rep.verdict == mcsp::Verdict::Disagree ? kExitUnsat : kExitSat;
}

int cmd_binarize(const Globals& g, const std::string& inst_path, const std::string& out, const std::string& alg_path,
                 const std::string& alg_out) {
    mcsp::Instance inst = read_instance(g, inst_path);
    mcsp::BinarizeResult b = mcsp::binarize(inst);
    mcsp::save_binary(out, b.graph, b.mapping.names());
    std::cout << b.graph.num_variables() << " tuple variables of arity " << b.mapping.arity << ", universe "
              << b.graph.universe_size() << "\n";
    if (!alg_out.empty()) {
        if (alg_path.empty()) throw mcsp::InvalidInput("--algebra-out needs --algebra");
        mcsp::save_algebra(alg_out, mcsp::lift_algebra(mcsp::load_algebra(alg_path), b.mapping.arity));
    }
    return kExitSat;
}

int cmd_propagate(const Globals& g, const std::string& path, bool trace) {
    mcsp::Instance inst = read_instance(g, path);
    mcsp::BinaryInstance bin = mcsp::binary_from_instance(inst);
    mcsp::PropagationResult r = mcsp::run_12_consistency(bin);
    std::cout << mcsp::to_string(r.status) << "\n";
    for (int x = 0; x < r.reduced.num_variables(); ++x)
        std::cout << mcsp::variable_label(inst.variable_names, x) << " " << r.reduced.domain_size(x) << "\n";
    if (trace)
        for (const auto& rm : r.removal_log) std::cout << mcsp::format_removal(rm, inst.variable_names) << "\n";
    return r.status == mcsp::PropagationStatus::Empty ? kExitUnsat : kExitSat;
}

int cmd_reduce(const Globals& g, const std::string& path, const std::vector<std::string>& alg_paths,
               const std::vector<int>& explain) {
    mcsp::Instance inst = read_instance(g, path);
    mcsp::BinaryInstance bin = mcsp::binary_from_instance(inst);
    std::vector<mcsp::FiniteAlgebra> algs;
    for (const auto& p : alg_paths) algs.push_back(mcsp::load_algebra(p));
    mcsp::DomainAlgebras da(std::move(algs), bin.num_variables(), g.depth);
    mcsp::TypeReduceResult r = mcsp::type_reduce(bin, da);
    for (std::size_t i = 0; i < r.passes.size(); ++i) {
        const auto& p = r.passes[i];
        std::cout << "pass " << i + 1 << ": support " << p.propagated << ", yellow " << p.yellow << ", red " << p.red
                  << ", shrink " << p.shrink << "\n";
    }
    std::cout << (r.unsat ? "UNSAT" : "REDUCED") << "\n";
    for (int x = 0; x < r.graph.num_variables(); ++x) {
        std::cout << mcsp::variable_label(inst.variable_names, x) << ":";
        for (int a : r.graph.domain(x)) std::cout << " " << a;
        std::cout << "\n";
    }
    if (!explain.empty()) {
        if (explain[0] < 1 || explain[0] > bin.num_variables()) throw mcsp::InvalidInput("--explain variable out of range");
        for (const auto& line : mcsp::explain_removal(bin, r.log, explain[0] - 1, explain[1])) std::cout << line << "\n";
    }
    return r.unsat ? kExitUnsat : kExitSat;
}

int cmd_colour(const Globals& g, const std::string& alg_path) {
    mcsp::FiniteAlgebra alg = mcsp::load_algebra(alg_path);
    mcsp::ColouredGraph cg = mcsp::coloured_graph(alg, g.depth);
    for (const auto& e : cg.edges) {
        std::cout << e.a << " " << e.b << " " << mcsp::to_string(e.colour);
        if (e.witness_term) std::cout << " " << mcsp::to_string(*e.witness_term, alg);
        std::cout << "\n";
    }
    std::cout << (cg.connected ? "connected" : "disconnected") << "\n";
    return kExitSat;
}

int cmd_core_check(const Globals& g, const std::string& path, int core_cap) {
    mcsp::Instance inst = read_instance(g, path);
    mcsp::BinarizeResult b = mcsp::binarize(inst);
    mcsp::CoreReport rep = mcsp::is_core(b.graph, core_cap);
    if (rep.is_core) {
        std::cout << "core\n";
        return kExitSat;
    }
    std::cout << "not a core\n";
    auto names = mcsp::display_names(inst, b.mapping);
    const auto& h = *rep.witness;
    for (int x = 0; x < b.graph.num_variables(); ++x) {
        std::cout << names[x] << ":";
        for (int a : b.graph.domain(x)) std::cout << " " << a << "->" << h[x][a];
        std::cout << "\n";
    }
    return kExitUnsat;
}

int cmd_gen(const Globals& g, const std::string& family, int modulus, int vars, double density, const std::string& prefix,
            int count, const std::string& out_dir) {
    mcsp::GeneratorConfig cfg;
    cfg.family = mcsp::parse_family(family);
    cfg.modulus = modulus;
    cfg.num_variables = vars;
    cfg.density = density;
    auto emit = [&](const std::string& stem, std::uint64_t seed) {
        cfg.seed = seed;
        mcsp::Generated out = mcsp::generate(cfg);
        mcsp::save_instance(stem + ".inst", out.instance);
        mcsp::save_algebra(stem + ".alg", out.algebra);
    };
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        for (int i = 0; i < count; ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "gen_%04d", i);
            emit((std::filesystem::path(out_dir) / name).string(), g.seed + static_cast<std::uint64_t>(i));
        }
        std::cout << count << " instances written to " << out_dir << "\n";
        return kExitSat;
    }
    if (prefix.empty()) throw mcsp::InvalidInput("gen needs -o <prefix> or --out-dir <dir>");
    emit(prefix, g.seed);
    return kExitSat;
}

} // namespace mcsp::cli
