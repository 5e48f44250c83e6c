#pragma once

// Line-oriented text formats for templates, instances and algebras.
//
//   template:  domain <n>
//              relation <name> <arity>  / one tuple per line /  end
//   instance:  universe <n>              (optional when a template is given)
//              vars <n>
//              varname <var> <name>
//              domainof <var> <v1> <v2> ...
//              relation <name> <arity> ... end
//              constraint <relname> <x1> ... <xk>
//              inline <arity> <x1> ... <xk>  / tuples /  end
//   algebra:   universe <n>
//              operation <name> <arity>  / <a1> ... <ak> -> <v> /  end
//              flag idempotent | flag taylor <term> | flag redop <name>
//
// Variables are 1-based in files; '#' starts a comment.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mcsp/algebra.hpp"
#include "mcsp/binarize.hpp"
#include "mcsp/structures.hpp"

namespace mcsp {

namespace detail {

struct Line {
    int number = 0;
    std::vector<std::string> words;
    std::string rest_after(std::size_t k) const {
        std::string s;
        for (std::size_t i = k; i < words.size(); ++i) {
            if (i > k) s += ' ';
            s += words[i];
        }
        return s;
    }
};

inline std::vector<Line> lex(std::string_view text) {
    std::vector<Line> out;
    std::istringstream in{std::string(text)};
    std::string raw;
    int no = 0;
    while (std::getline(in, raw)) {
        ++no;
        if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
        std::istringstream ls(raw);
        Line l;
        l.number = no;
        for (std::string w; ls >> w;) l.words.push_back(w);
        if (!l.words.empty()) out.push_back(std::move(l));
    }
    return out;
}

inline int to_int(const Line& l, std::size_t i, const char* what) {
    if (i >= l.words.size()) throw ParseError(l.number, std::string("missing ") + what);
    const std::string& w = l.words[i];
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(w, &used);
    } catch (const std::exception&) {
        throw ParseError(l.number, std::string("expected an integer for ") + what + ", got '" + w + "'");
    }
    if (used != w.size()) throw ParseError(l.number, std::string("expected an integer for ") + what + ", got '" + w + "'");
    return v;
}

inline void expect_words(const Line& l, std::size_t n) {
    if (l.words.size() != n)
        throw ParseError(l.number, "'" + l.words[0] + "' expects " + std::to_string(n - 1) + " argument(s)");
}

class Cursor {
public:
    explicit Cursor(std::vector<Line> lines) : lines_(std::move(lines)) {}
    bool done() const { return i_ >= lines_.size(); }
    const Line& next() { return lines_[i_++]; }
    int last_line() const { return lines_.empty() ? 0 : lines_.back().number; }

private:
    std::vector<Line> lines_;
    std::size_t i_ = 0;
};

// Reads tuples up to `end`; entries are range-checked against the universe.
inline std::vector<Tuple> read_tuples(Cursor& cur, int arity, int universe, const std::string& owner, int open_line) {
    std::vector<Tuple> ts;
    while (!cur.done()) {
        const Line& l = cur.next();
        if (l.words[0] == "end") {
            expect_words(l, 1);
            return ts;
        }
        if (static_cast<int>(l.words.size()) != arity)
            throw ParseError(l.number, "tuple of '" + owner + "' has " + std::to_string(l.words.size()) + " entries, expected " +
                                           std::to_string(arity));
        Tuple t;
        for (int i = 0; i < arity; ++i) {
            int v = to_int(l, i, "tuple entry");
            if (v < 0 || v >= universe) throw ParseError(l.number, "tuple entry " + std::to_string(v) + " outside the universe");
            t.push_back(v);
        }
        ts.push_back(std::move(t));
    }
    throw ParseError(open_line, "block of '" + owner + "' is missing 'end'");
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write '" + path + "'");
    out << text;
}

inline void write_tuples(std::ostringstream& os, const std::vector<Tuple>& ts) {
    for (const auto& t : ts) {
        for (std::size_t i = 0; i < t.size(); ++i) os << (i ? " " : "") << t[i];
        os << "\n";
    }
}

} // namespace detail

// --------------------------------------------------------------- template

inline RelationalTemplate parse_template(std::string_view text) {
    detail::Cursor cur(detail::lex(text));
    RelationalTemplate t;
    bool have_domain = false;
    while (!cur.done()) {
        const detail::Line& l = cur.next();
        const std::string& kw = l.words[0];
        if (kw == "domain") {
            detail::expect_words(l, 2);
            t.universe_size = detail::to_int(l, 1, "domain size");
            if (t.universe_size <= 0) throw ParseError(l.number, "domain size must be positive");
            have_domain = true;
        } else if (kw == "relation") {
            if (!have_domain) throw ParseError(l.number, "'domain' must precede relations");
            detail::expect_words(l, 3);
            Relation r;
            r.name = l.words[1];
            r.arity = detail::to_int(l, 2, "arity");
            if (r.arity <= 0) throw ParseError(l.number, "arity must be positive");
            if (t.find(r.name)) throw ParseError(l.number, "duplicate relation name '" + r.name + "'");
            r.tuples = detail::read_tuples(cur, r.arity, t.universe_size, r.name, l.number);
            r.normalize();
            t.relations.push_back(std::move(r));
        } else {
            throw ParseError(l.number, "unknown keyword '" + kw + "'");
        }
    }
    if (!have_domain) throw ParseError(cur.last_line(), "missing 'domain'");
    t.validate();
    return t;
}

inline std::string serialize_template(const RelationalTemplate& t) {
    std::ostringstream os;
    os << "domain " << t.universe_size << "\n";
    for (const auto& r : t.relations) {
        os << "relation " << r.name << " " << r.arity << "\n";
        detail::write_tuples(os, r.tuples);
        os << "end\n";
    }
    return os.str();
}

// --------------------------------------------------------------- instance

inline bool is_inline_name(const std::string& name) { return name.rfind("_inline", 0) == 0; }

inline Instance parse_instance(std::string_view text, const RelationalTemplate* tmpl = nullptr) {
    detail::Cursor cur(detail::lex(text));
    Instance inst;
    int universe = tmpl ? tmpl->universe_size : 0;
    if (tmpl) inst.relations = tmpl->relations;
    bool have_vars = false;
    auto need_vars = [&](const detail::Line& l) {
        if (!have_vars) throw ParseError(l.number, "'vars' must come first");
    };
    auto var_at = [&](const detail::Line& l, std::size_t i) {
        int v = detail::to_int(l, i, "variable");
        if (v < 1 || v > inst.num_variables) throw ParseError(l.number, "variable " + std::to_string(v) + " out of range");
        return v - 1;
    };
    while (!cur.done()) {
        const detail::Line& l = cur.next();
        const std::string& kw = l.words[0];
        if (kw == "universe" || kw == "domain") {
            detail::expect_words(l, 2);
            int n = detail::to_int(l, 1, "universe size");
            if (n <= 0) throw ParseError(l.number, "universe size must be positive");
            if (tmpl && n != tmpl->universe_size) throw ParseError(l.number, "universe differs from the template");
            if (have_vars) throw ParseError(l.number, "'universe' must precede 'vars'");
            universe = n;
        } else if (kw == "vars") {
            detail::expect_words(l, 2);
            if (have_vars) throw ParseError(l.number, "duplicate 'vars'");
            if (universe <= 0) throw ParseError(l.number, "universe unknown: give 'universe <n>' or a template");
            int n = detail::to_int(l, 1, "variable count");
            if (n <= 0) throw ParseError(l.number, "variable count must be positive");
            auto rels = std::move(inst.relations);
            inst = Instance(universe, n);
            inst.relations = std::move(rels);
            have_vars = true;
        } else if (kw == "varname") {
            need_vars(l);
            detail::expect_words(l, 3);
            inst.variable_names[var_at(l, 1)] = l.words[2];
        } else if (kw == "domainof") {
            need_vars(l);
            if (l.words.size() < 3) throw ParseError(l.number, "domain must be non-empty");
            int x = var_at(l, 1);
            std::vector<int> d;
            for (std::size_t i = 2; i < l.words.size(); ++i) {
                int v = detail::to_int(l, i, "domain value");
                if (v < 0 || v >= universe) throw ParseError(l.number, "domain value " + std::to_string(v) + " outside the universe");
                d.push_back(v);
            }
            std::sort(d.begin(), d.end());
            d.erase(std::unique(d.begin(), d.end()), d.end());
            inst.domains[x] = std::move(d);
        } else if (kw == "relation") {
            if (universe <= 0) throw ParseError(l.number, "universe unknown: give 'universe <n>' or a template");
            detail::expect_words(l, 3);
            Relation r;
            r.name = l.words[1];
            r.arity = detail::to_int(l, 2, "arity");
            if (r.arity <= 0) throw ParseError(l.number, "arity must be positive");
            if (inst.relation_index(r.name) >= 0) throw ParseError(l.number, "duplicate relation name '" + r.name + "'");
            r.tuples = detail::read_tuples(cur, r.arity, universe, r.name, l.number);
            r.normalize();
            inst.relations.push_back(std::move(r));
        } else if (kw == "constraint") {
            need_vars(l);
            if (l.words.size() < 3) throw ParseError(l.number, "constraint needs a relation and a scope");
            int ri = inst.relation_index(l.words[1]);
            if (ri < 0) throw ParseError(l.number, "unknown relation '" + l.words[1] + "'");
            std::vector<int> scope;
            for (std::size_t i = 2; i < l.words.size(); ++i) scope.push_back(var_at(l, i));
            if (static_cast<int>(scope.size()) != inst.relations[ri].arity)
                throw ParseError(l.number, "scope length differs from arity of '" + l.words[1] + "'");
            inst.add_constraint(std::move(scope), ri);
        } else if (kw == "inline") {
            need_vars(l);
            if (l.words.size() < 3) throw ParseError(l.number, "inline needs an arity and a scope");
            int arity = detail::to_int(l, 1, "arity");
            if (arity <= 0) throw ParseError(l.number, "arity must be positive");
            std::vector<int> scope;
            for (std::size_t i = 2; i < l.words.size(); ++i) scope.push_back(var_at(l, i));
            if (static_cast<int>(scope.size()) != arity) throw ParseError(l.number, "scope length differs from the inline arity");
            Relation r("", arity, detail::read_tuples(cur, arity, universe, "inline", l.number));
            inst.add_constraint(std::move(scope), std::move(r));
        } else {
            throw ParseError(l.number, "unknown keyword '" + kw + "'");
        }
    }
    if (!have_vars) throw ParseError(cur.last_line(), "missing 'vars'");
    inst.validate();
    return inst;
}

// Self-contained form: relations used through `inline` are written inline,
// every other relation as a block up front.
inline std::string serialize_instance(const Instance& inst) {
    std::ostringstream os;
    os << "universe " << inst.universe_size << "\n";
    os << "vars " << inst.num_variables << "\n";
    for (int x = 0; x < inst.num_variables; ++x)
        if (x < static_cast<int>(inst.variable_names.size()) && !inst.variable_names[x].empty())
            os << "varname " << x + 1 << " " << inst.variable_names[x] << "\n";
    for (int x = 0; x < inst.num_variables; ++x) {
        if (static_cast<int>(inst.domains[x].size()) == inst.universe_size) continue;
        os << "domainof " << x + 1;
        for (int v : inst.domains[x]) os << " " << v;
        os << "\n";
    }
    for (const auto& r : inst.relations) {
        if (is_inline_name(r.name)) continue;
        os << "relation " << r.name << " " << r.arity << "\n";
        detail::write_tuples(os, r.tuples);
        os << "end\n";
    }
    for (const auto& c : inst.constraints) {
        const Relation& r = inst.relations[c.relation];
        if (is_inline_name(r.name)) {
            os << "inline " << r.arity;
            for (int x : c.scope) os << " " << x + 1;
            os << "\n";
            detail::write_tuples(os, r.tuples);
            os << "end\n";
        } else {
            os << "constraint " << r.name;
            for (int x : c.scope) os << " " << x + 1;
            os << "\n";
        }
    }
    return os.str();
}

// ---------------------------------------------------------------- algebra

inline FiniteAlgebra parse_algebra(std::string_view text) {
    detail::Cursor cur(detail::lex(text));
    FiniteAlgebra alg;
    std::optional<std::pair<std::string, int>> taylor;
    while (!cur.done()) {
        const detail::Line& l = cur.next();
        const std::string& kw = l.words[0];
        if (kw == "universe") {
            detail::expect_words(l, 2);
            alg.size = detail::to_int(l, 1, "universe size");
            if (alg.size <= 0) throw ParseError(l.number, "universe size must be positive");
        } else if (kw == "operation") {
            if (alg.size <= 0) throw ParseError(l.number, "'universe' must precede operations");
            detail::expect_words(l, 3);
            Operation op;
            op.name = l.words[1];
            op.arity = detail::to_int(l, 2, "arity");
            if (op.arity <= 0) throw ParseError(l.number, "arity must be positive");
            if (alg.find_operation(op.name) >= 0) throw ParseError(l.number, "duplicate operation name '" + op.name + "'");
            std::size_t rows = 1;
            for (int i = 0; i < op.arity; ++i) {
                rows *= static_cast<std::size_t>(alg.size);
                if (rows > (std::size_t{1} << 26)) throw ParseError(l.number, "operation table too large");
            }
            op.table.assign(rows, -1);
            bool closed = false;
            while (!cur.done()) {
                const detail::Line& row = cur.next();
                if (row.words[0] == "end") {
                    detail::expect_words(row, 1);
                    for (std::size_t r = 0; r < rows; ++r)
                        if (op.table[r] < 0) throw ParseError(row.number, "operation '" + op.name + "' table is not total");
                    closed = true;
                    break;
                }
                if (static_cast<int>(row.words.size()) != op.arity + 2 || row.words[op.arity] != "->")
                    throw ParseError(row.number, "expected " + std::to_string(op.arity) + " arguments, '->' and a value");
                std::size_t idx = 0;
                for (int i = 0; i < op.arity; ++i) {
                    int a = detail::to_int(row, i, "argument");
                    if (a < 0 || a >= alg.size) throw ParseError(row.number, "argument " + std::to_string(a) + " outside the universe");
                    idx = idx * alg.size + a;
                }
                int v = detail::to_int(row, op.arity + 1, "value");
                if (v < 0 || v >= alg.size) throw ParseError(row.number, "value " + std::to_string(v) + " outside the universe");
                if (op.table[idx] >= 0) throw ParseError(row.number, "duplicate row");
                op.table[idx] = v;
            }
            if (!closed) throw ParseError(l.number, "operation '" + op.name + "' is missing 'end'");
            alg.operations.push_back(std::move(op));
        } else if (kw == "flag") {
            if (l.words.size() < 2) throw ParseError(l.number, "flag needs a name");
            if (l.words[1] == "idempotent") {
                detail::expect_words(l, 2);
                alg.idempotent = true;
            } else if (l.words[1] == "taylor") {
                if (l.words.size() < 3) throw ParseError(l.number, "taylor flag needs a term");
                taylor = std::make_pair(l.rest_after(2), l.number);
            } else if (l.words[1] == "redop") {
                detail::expect_words(l, 3);
                alg.redop = l.words[2];
            } else {
                throw ParseError(l.number, "unknown flag '" + l.words[1] + "'");
            }
        } else {
            throw ParseError(l.number, "unknown keyword '" + kw + "'");
        }
    }
    if (alg.size <= 0) throw ParseError(cur.last_line(), "missing 'universe'");
    if (taylor) {
        try {
            alg.taylor_term = parse_term(taylor->first, alg);
        } catch (const InvalidInput& e) {
            throw ParseError(taylor->second, e.what());
        }
        const int arity = alg.taylor_term->num_vars();
        if (arity < 2 || !check_identities(alg, taylor_identities(*alg.taylor_term, arity)))
            throw ParseError(taylor->second, "Taylor identities fail for the supplied term");
    }
    alg.validate();
    return alg;
}

inline std::string serialize_algebra(const FiniteAlgebra& alg) {
    std::ostringstream os;
    os << "universe " << alg.size << "\n";
    for (const auto& op : alg.operations) {
        os << "operation " << op.name << " " << op.arity << "\n";
        std::vector<int> args(op.arity, 0);
        for (std::size_t r = 0; r < op.table.size(); ++r) {
            for (int a : args) os << a << " ";
            os << "-> " << op.table[r] << "\n";
            int i = op.arity - 1;
            while (i >= 0 && ++args[i] == alg.size) args[i--] = 0;
        }
        os << "end\n";
    }
    if (alg.idempotent) os << "flag idempotent\n";
    if (alg.taylor_term) os << "flag taylor " << to_string(*alg.taylor_term, alg) << "\n";
    if (!alg.redop.empty()) os << "flag redop " << alg.redop << "\n";
    return os.str();
}

// --------------------------------------------------------- file helpers

inline RelationalTemplate load_template(const std::string& path) { return parse_template(detail::slurp(path)); }
inline Instance load_instance(const std::string& path, const RelationalTemplate* tmpl = nullptr) {
    return parse_instance(detail::slurp(path), tmpl);
}
inline FiniteAlgebra load_algebra(const std::string& path) { return parse_algebra(detail::slurp(path)); }

inline void save_template(const std::string& path, const RelationalTemplate& t) { detail::spill(path, serialize_template(t)); }
inline void save_instance(const std::string& path, const Instance& i) { detail::spill(path, serialize_instance(i)); }
inline void save_algebra(const std::string& path, const FiniteAlgebra& a) { detail::spill(path, serialize_algebra(a)); }

// Binary instance read from an instance file with constraints of arity at
// most two: E[x][y] is the intersection of everything on (x,y) and (y,x).
inline BinaryInstance binary_from_instance(const Instance& inst) {
    if (inst.max_arity() > 2) throw InvalidInput("binary instance files may only hold unary and binary constraints");
    return binarize(inst).graph;
}

inline std::string serialize_binary(const BinaryInstance& g, const std::vector<std::string>& names = {}) {
    return serialize_instance(to_instance(g, names));
}

inline void save_binary(const std::string& path, const BinaryInstance& g, const std::vector<std::string>& names = {}) {
    detail::spill(path, serialize_binary(g, names));
}

} // namespace mcsp
