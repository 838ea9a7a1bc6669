#pragma once

#include <iosfwd>
#include <vector>

#include "pomdp/lp.hpp"

namespace pomdp {

// LP plus a set of variables constrained to {0,1}.
struct MilpProblem {
    LpProblem base;
    std::vector<int> binaries;  // variable indices, bounds must lie within [0,1]

    void validate() const;
};

enum class MilpStatus : std::uint8_t { Optimal, TimeLimit, Infeasible };

const char* to_string(MilpStatus s);

struct MilpResult {
    MilpStatus status = MilpStatus::Infeasible;
    double incumbent = -kInf;                 // z
    double best_bound = kInf;                 // z bar
    std::vector<double> incumbent_values;     // per variable, empty if none found
    double root_relaxation = 0.0;             // z_LR
    long nodes_processed = 0;                 // LP-solved nodes including the root
    long nodes_branched = 0;                  // nodes that produced children
    double wall_seconds = 0.0;
    double final_gap_percent = 0.0;           // 100 (zbar - z) / max(|z|, 1e-9)
    double integrality_gap_percent = 0.0;     // 100 (z_LR - z) / max(|z|, 1e-9)

    bool has_incumbent() const { return !incumbent_values.empty(); }
};

struct MilpOptions {
    double time_limit_seconds = 600.0;
    double gap_tolerance = 1e-6;     // relative
    long lp_iteration_limit = 50'000'000;
    bool warm_start_nodes = true;    // reuse the parent basis (deterministic)
    std::ostream* node_log = nullptr;  // one CSV line per node: id,depth,bound,incumbent
};

// Best-bound branch and bound; branches on the most fractional binary
// (ties: lowest index), children fix the variable to 0 then 1. Integer
// tolerance 1e-6. Deterministic for fixed inputs and limits.
MilpResult solve_milp(const MilpProblem& problem, const MilpOptions& options = {});

// LP relaxation of the MILP (binaries relaxed to their [0,1] bounds).
LpSolution root_relaxation(const MilpProblem& problem, long iteration_limit = 50'000'000);

}  // namespace pomdp
