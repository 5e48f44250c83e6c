#pragma once

// Subcommands of the mcsp tool. Each returns the process exit code.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcsp/mcsp.hpp"

namespace mcsp::cli {

inline constexpr int kExitSat = 0;
inline constexpr int kExitUnsat = 1;
inline constexpr int kExitError = 2;

struct Globals {
    std::uint64_t cap = mcsp::kDefaultOracleCap;
    int depth = mcsp::kDefaultTermDepth;
    bool assume_core = false;
    std::uint64_t seed = 1;
    std::string template_path;
};

int cmd_solve(const Globals& g, const std::string& inst_path, const std::string& alg_path, bool certificate,
              std::optional<std::uint64_t> seed_zero);
int cmd_oracle(const Globals& g, const std::string& inst_path, bool count, bool all);
int cmd_compare(const Globals& g, const std::string& inst_path, const std::string& alg_path, const std::string& batch);
int cmd_binarize(const Globals& g, const std::string& inst_path, const std::string& out, const std::string& alg_path,
                 const std::string& alg_out);
int cmd_propagate(const Globals& g, const std::string& path, bool trace);
int cmd_reduce(const Globals& g, const std::string& path, const std::vector<std::string>& alg_paths,
               const std::vector<int>& explain);
int cmd_colour(const Globals& g, const std::string& alg_path);
int cmd_core_check(const Globals& g, const std::string& path, int core_cap);
int cmd_gen(const Globals& g, const std::string& family, int modulus, int vars, double density, const std::string& prefix,
            int count, const std::string& out_dir);

} // namespace mcsp::cli
