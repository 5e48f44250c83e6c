#pragma once

// Plain-text renderings shared by the command-line tool and the tests.

#include <sstream>
#include <string>
#include <vector>

#include "mcsp/affine.hpp"
#include "mcsp/linear_system.hpp"
#include "mcsp/propagate.hpp"
#include "mcsp/structures.hpp"

namespace mcsp {

inline std::string variable_label(const std::vector<std::string>& names, int x) {
    if (x >= 0 && x < static_cast<int>(names.size()) && !names[x].empty()) return names[x];
    return std::to_string(x + 1);
}

// One "var value" line per variable.
inline std::string format_assignment(const Instance& inst, const Assignment& a) {
    std::ostringstream os;
    for (int x = 0; x < inst.num_variables; ++x) os << variable_label(inst.variable_names, x) << " " << a[x] << "\n";
    return os.str();
}

inline std::string format_removal(const Removal& r, const std::vector<std::string>& names = {}) {
    std::string s = "remove " + variable_label(names, r.var) + " = " + std::to_string(r.value) + " (" + r.reason;
    if (r.neighbor >= 0) s += " towards " + variable_label(names, r.neighbor);
    return s + ")";
}

// Walks of a refutation as "v0 -[+c]-> v1 ... -> v0" lines; `labels` maps
// system variables to display names and the ground node prints as "0".
inline std::string format_certificate(const LinearSystem& sys, const LinearCertificate& cert,
                                      const std::vector<std::string>& labels) {
    auto name = [&](int v) { return v == sys.num_vars ? std::string("0") : variable_label(labels, v); };
    std::ostringstream os;
    if (cert.kind == LinearCertificate::Kind::Conflict) {
        os << "conflict: no pair of values for " << name(cert.conflict.first) << " and " << name(cert.conflict.second) << "\n";
        return os.str();
    }
    const int ne = static_cast<int>(sys.equations.size());
    for (const auto& walk : cert.walks) {
        os << "cycle: " << name(cert.base);
        int at = cert.base;
        bool twisted = false;
        for (const auto& st : walk) {
            int from, to, off;
            if (st.edge < ne) {
                const Equation& e = sys.equations[st.edge];
                from = e.from;
                to = e.to;
                off = e.offset;
                twisted |= !e.twist.empty();
            } else {
                from = sys.num_vars;
                to = sys.pins[st.edge - ne].first;
                off = sys.pins[st.edge - ne].second;
            }
            at = st.forward ? to : from;
            if (st.edge < ne && twisted) os << (st.forward ? " -[+" : " -[-") << off << "]-> " << name(at);
            else os << " -[+" << (st.forward ? off : sys.group.neg(off)) << "]-> " << name(at);
        }
        if (!twisted) os << "  total " << walk_offset(sys, walk);
        os << "\n";
    }
    return os.str();
}

} // namespace mcsp
