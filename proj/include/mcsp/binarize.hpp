#pragma once

// Reduction of an arbitrary instance to a syntactically simple binary
// instance whose variables are ceil(p/2)-tuples of original variables.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "mcsp/algebra.hpp"
#include "mcsp/structures.hpp"

namespace mcsp {

// Tuple variables in lexicographic order; values of a tuple variable are
// encoded base |A| with the first component most significant.
struct VariableMapping {
    int arity = 1;                            // components per tuple variable
    int universe_size = 0;                    // of the source instance
    int num_source_variables = 0;
    std::vector<std::vector<int>> components;  // per tuple variable

    int encode(const std::vector<int>& values) const {
        int code = 0;
        for (int v : values) code = code * universe_size + v;
        return code;
    }
    std::vector<int> decode(int code) const {
        std::vector<int> vals(arity);
        for (int i = arity - 1; i >= 0; --i) {
            vals[i] = code % universe_size;
            code /= universe_size;
        }
        return vals;
    }
    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& c : components) {
            std::string s = "t";
            for (int x : c) s += "_" + std::to_string(x + 1);
            out.push_back(std::move(s));
        }
        return out;
    }
};

// Names for the tuple variables: the source names when tuples are single
// variables, t_i_j... otherwise.
inline std::vector<std::string> display_names(const Instance& inst, const VariableMapping& m) {
    if (m.arity != 1) return m.names();
    std::vector<std::string> out;
    for (const auto& c : m.components) {
        const int x = c.front();
        const bool named = x < static_cast<int>(inst.variable_names.size()) && !inst.variable_names[x].empty();
        out.push_back(named ? inst.variable_names[x] : std::to_string(x + 1));
    }
    return out;
}

struct BinarizeResult {
    BinaryInstance graph;
    VariableMapping mapping;
};

struct BinarizeOptions {
    std::size_t max_tuple_variables = 4096;
    std::size_t max_cells = BinaryInstance::kMaxCells;
};

namespace detail {

inline int ipow(int base, int exp, std::size_t cap, const char* what) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) {
        r *= static_cast<std::size_t>(base);
        if (r > cap) throw CapExceeded(what);
    }
    return static_cast<int>(r);
}

// Partial assignment over source variables; kUnassigned marks holes.
inline bool bind(std::vector<int>& slot, const std::vector<int>& vars, const std::vector<int>& vals) {
    for (std::size_t i = 0; i < vars.size(); ++i) {
        int& s = slot[vars[i]];
        if (s == kUnassigned) s = vals[i];
        else if (s != vals[i]) return false;
    }
    return true;
}

inline bool satisfies_covered(const Instance& inst, const std::vector<int>& slot, const std::vector<int>& covered) {
    Tuple image;
    for (int ci : covered) {
        const Constraint& c = inst.constraints[ci];
        image.clear();
        for (int x : c.scope) image.push_back(slot[x]);
        if (!inst.relations[c.relation].contains(image)) return false;
    }
    return true;
}

} // namespace detail

// Builds the binary instance. A tuple variable's domain keeps the value
// tuples that agree on repeated components and satisfy every constraint
// whose scope lies inside the tuple; E[x][y] keeps the pairs whose joint
// partial assignment is consistent and satisfies every constraint with scope
// inside the union of both tuples.
inline BinarizeResult binarize(const Instance& inst, const BinarizeOptions& opts = {}) {
    inst.validate();
    const int n = inst.num_variables;
    const int u = inst.universe_size;
    const int p = std::max(1, inst.max_arity());
    const int k = (p + 1) / 2;

    BinarizeResult res;
    VariableMapping& m = res.mapping;
    m.arity = k;
    m.universe_size = u;
    m.num_source_variables = n;
    const int tv = detail::ipow(n, k, opts.max_tuple_variables, "too many tuple variables");
    const int codes = detail::ipow(u, k, std::size_t{1} << 20, "tuple universe too large");
    for (int t = 0; t < tv; ++t) {
        std::vector<int> comp(k);
        int rest = t;
        for (int i = k - 1; i >= 0; --i) {
            comp[i] = rest % n;
            rest /= n;
        }
        m.components.push_back(std::move(comp));
    }
    const std::size_t cells = static_cast<std::size_t>(tv) * tv * codes * codes;
    if (cells > opts.max_cells) throw CapExceeded("binarized instance too large (" + std::to_string(cells) + " cells)");

    res.graph = BinaryInstance(tv, codes);
    BinaryInstance& g = res.graph;

    auto covered_by = [&](const std::vector<char>& in) {
        std::vector<int> out;
        for (std::size_t ci = 0; ci < inst.constraints.size(); ++ci) {
            const auto& sc = inst.constraints[ci].scope;
            if (std::all_of(sc.begin(), sc.end(), [&](int x) { return in[x] != 0; })) out.push_back(static_cast<int>(ci));
        }
        return out;
    };

    std::vector<std::vector<int>> values(codes);
    for (int c = 0; c < codes; ++c) values[c] = m.decode(c);

    std::vector<int> slot(n, kUnassigned);
    auto reset = [&](const std::vector<int>& vars) {
        for (int x : vars) slot[x] = kUnassigned;
    };

    for (int x = 0; x < tv; ++x) {
        const auto& cx = m.components[x];
        std::vector<char> in(n, 0);
        for (int v : cx) in[v] = 1;
        auto cov = covered_by(in);
        for (int c = 0; c < codes; ++c) {
            const auto& vals = values[c];
            bool ok = true;
            for (int i = 0; i < k && ok; ++i)
                ok = std::binary_search(inst.domains[cx[i]].begin(), inst.domains[cx[i]].end(), vals[i]);
            if (ok) ok = detail::bind(slot, cx, vals) && detail::satisfies_covered(inst, slot, cov);
            reset(cx);
            g.set_in_domain(x, c, ok);
        }
    }

    for (int x = 0; x < tv; ++x)
        for (int y = x + 1; y < tv; ++y) {
            const auto& cx = m.components[x];
            const auto& cy = m.components[y];
            std::vector<char> in(n, 0);
            for (int v : cx) in[v] = 1;
            for (int v : cy) in[v] = 1;
            auto cov = covered_by(in);
            for (int a = 0; a < codes; ++a) {
                if (!g.in_domain(x, a)) continue;
                for (int b = 0; b < codes; ++b) {
                    if (!g.in_domain(y, b)) continue;
                    bool ok = detail::bind(slot, cx, values[a]) && detail::bind(slot, cy, values[b]) &&
                              detail::satisfies_covered(inst, slot, cov);
                    reset(cx);
                    reset(cy);
                    if (ok) g.set_pair(x, y, a, b, true);
                }
            }
        }
    g.reset_diagonals();
    return res;
}

// Reads each source variable from the tuple variables that contain it and
// checks that all reads agree.
inline Assignment project_solution(const Assignment& binary_solution, const VariableMapping& m) {
    if (binary_solution.size() != m.components.size()) throw InvalidInput("partial assignment");
    Assignment out(m.num_source_variables, kUnassigned);
    for (std::size_t t = 0; t < m.components.size(); ++t) {
        if (binary_solution[t] == kUnassigned) throw InvalidInput("partial assignment");
        auto vals = m.decode(binary_solution[t]);
        for (int i = 0; i < m.arity; ++i) {
            int& slot = out[m.components[t][i]];
            if (slot == kUnassigned) slot = vals[i];
            else if (slot != vals[i]) throw InternalError("binarization soundness violated");
        }
    }
    return out;
}

// Power algebra A^k, coordinatewise, with the same encoding as VariableMapping.
inline FiniteAlgebra lift_algebra(const FiniteAlgebra& alg, int k, std::size_t max_universe = 4096,
                                  std::size_t max_table = std::size_t{1} << 24) {
    if (k < 1) throw InvalidInput("lift exponent must be positive");
    if (k == 1) return alg;
    const int size = detail::ipow(alg.size, k, max_universe, "lifted universe exceeds cap");
    FiniteAlgebra p;
    p.size = size;
    p.idempotent = alg.idempotent;
    p.redop = alg.redop;
    p.taylor_term = alg.taylor_term;
    auto decode = [&](int code, std::vector<int>& out) {
        for (int i = k - 1; i >= 0; --i) {
            out[i] = code % alg.size;
            code /= alg.size;
        }
    };
    for (std::size_t op = 0; op < alg.operations.size(); ++op) {
        Operation o{alg.operations[op].name, alg.operations[op].arity, {}};
        std::size_t rows = 1;
        for (int i = 0; i < o.arity; ++i) {
            rows *= static_cast<std::size_t>(size);
            if (rows > max_table) throw CapExceeded("lifted operation table exceeds cap");
        }
        o.table.resize(rows);
        std::vector<std::vector<int>> args(o.arity, std::vector<int>(k));
        std::vector<int> coord(o.arity);
        for (std::size_t r = 0; r < rows; ++r) {
            std::size_t rest = r;
            for (int i = o.arity - 1; i >= 0; --i) {
                decode(static_cast<int>(rest % size), args[i]);
                rest /= size;
            }
            int code = 0;
            for (int j = 0; j < k; ++j) {
                for (int i = 0; i < o.arity; ++i) coord[i] = args[i][j];
                code = code * alg.size + alg.apply(static_cast<int>(op), coord);
            }
            o.table[r] = code;
        }
        p.operations.push_back(std::move(o));
    }
    return p;
}

} // namespace mcsp
