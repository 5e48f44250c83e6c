#pragma once

// Solver-versus-oracle comparison, for single instances and directories.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "mcsp/affine.hpp"
#include "mcsp/io.hpp"
#include "mcsp/oracle.hpp"

namespace mcsp {

enum class Verdict { Agree, Disagree, Skipped };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Agree: return "AGREE";
        case Verdict::Disagree: return "DISAGREE";
        case Verdict::Skipped: return "SKIPPED";
    }
    return "SKIPPED";
}

struct CompareReport {
    Verdict verdict = Verdict::Skipped;
    std::string solver;  // SAT, UNSAT or the error text
    std::string oracle;  // SAT, UNSAT or "oracle skipped"
    std::string note;

    std::string line() const {
        std::string s = std::string(to_string(verdict)) + " solver=" + solver + " oracle=" + oracle;
        if (!note.empty()) s += " (" + note + ")";
        return s;
    }
};

struct CompareOptions {
    SolveOptions solve;
    std::uint64_t oracle_cap = kDefaultOracleCap;
};

inline CompareReport compare(const Instance& inst, const FiniteAlgebra& alg, const CompareOptions& opts = {}) {
    CompareReport rep;
    bool oracle_sat = false;
    try {
        oracle_sat = oracle_satisfiable(inst, opts.oracle_cap);
        rep.oracle = oracle_sat ? "SAT" : "UNSAT";
    } catch (const CapExceeded&) {
        rep.oracle = "oracle skipped";
    }
    SolveResult sr;
    try {
        sr = solve(inst, alg, opts.solve);
        rep.solver = sr.sat ? "SAT" : "UNSAT";
    } catch (const Error& e) {
        rep.solver = "error";
        rep.note = e.what();
        return rep;
    }
    if (rep.oracle == "oracle skipped") return rep;
    if (sr.sat != oracle_sat) {
        rep.verdict = Verdict::Disagree;
        return rep;
    }
    if (sr.sat && !evaluate_assignment(inst, sr.assignment)) {
        rep.verdict = Verdict::Disagree;
        rep.note = "solver assignment fails re-verification";
        return rep;
    }
    rep.verdict = Verdict::Agree;
    return rep;
}

struct BatchSummary {
    std::vector<std::pair<std::string, CompareReport>> reports;  // by file name
    int agree = 0, disagree = 0, skipped = 0;

    std::string summary_line() const {
        std::ostringstream os;
        os << "agree " << agree << "/" << reports.size() << " (disagree " << disagree << ", skipped " << skipped << ")";
        return os.str();
    }
};

// Every *.inst file in `dir`, paired with the *.alg file of the same stem or
// with `shared` when no such file exists.
inline BatchSummary compare_batch(const std::string& dir, const FiniteAlgebra* shared, const CompareOptions& opts = {}) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw InvalidInput("'" + dir + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".inst") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    BatchSummary out;
    for (const auto& f : files) {
        CompareReport rep;
        try {
            Instance inst = load_instance(f.string());
            fs::path alg_path = f;
            alg_path.replace_extension(".alg");
            FiniteAlgebra alg;
            if (fs::exists(alg_path)) alg = load_algebra(alg_path.string());
            else if (shared) alg = *shared;
            else throw InvalidInput("no algebra for " + f.filename().string());
            rep = compare(inst, alg, opts);
        } catch (const Error& e) {
            rep.verdict = Verdict::Skipped;
            rep.solver = "error";
            rep.oracle = "-";
            rep.note = e.what();
        }
        switch (rep.verdict) {
            case Verdict::Agree: ++out.agree; break;
            case Verdict::Disagree: ++out.disagree; break;
            case Verdict::Skipped: ++out.skipped; break;
        }
        out.reports.emplace_back(f.filename().string(), std::move(rep));
    }
    return out;
}

} // namespace mcsp
