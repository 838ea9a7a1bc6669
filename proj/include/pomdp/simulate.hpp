#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pomdp/model.hpp"

namespace pomdp {

enum class HeuristicKind : std::uint8_t { Alg1, Greedy };

const char* to_string(HeuristicKind h);

struct StepRecord {
    std::vector<int> state;  // per component, before acting
    std::vector<int> obs;    // per component
    int action = 0;
    double reward = 0.0;
    double decision_seconds = 0.0;  // LP build + solve (zero-ish for greedy)
};

struct Scenario {
    std::uint64_t seed = 0;
    std::vector<StepRecord> log;
    std::vector<int> final_state;
    bool impossible_observation = false;  // belief filter hit a zero normalizer

    double total_reward() const;
    double mean_decision_seconds() const;
};

struct SolveOptions {
    bool cuts_in_heuristic = false;  // the rolling solves use the plain fluid LP
    bool condition_bound_on_obs = true;
    int fixed_window = 0;            // 0: shrinking horizon T-t+1
    long lp_iteration_limit = 50'000'000;
    int threads = 1;
};

// Per-component filter with the observation, then prediction with the
// action; falls back to prediction from the unfiltered belief (and flags)
// when the observation has probability zero under the belief.
Belief belief_update(const Belief& belief, const std::vector<int>& obs, int action,
                     const DecomposablePomdp& dec, bool* flagged = nullptr);

// Rolling re-solve policy: at each step, solve the fluid LP on the
// remaining horizon with the current beliefs as initial distributions,
// conditioned on the sampled observation, and apply argmax tau_a^1.
Scenario run_heuristic_policy(const DecomposablePomdp& dec, std::uint64_t scenario_seed,
                              const SolveOptions& options = {});

// Baseline: most probable state per component under the filtered belief,
// action maximizing the summed expected immediate reward.
Scenario run_greedy_policy(const DecomposablePomdp& dec, std::uint64_t scenario_seed);

struct ScenarioRow {
    long k = 0;
    std::uint64_t seed = 0;
    double z_mk = 0.0;     // fluid-with-cuts bound conditioned on the first observation
    double reward = 0.0;   // R_k
    bool gap_defined = true;
    double gap_percent = 0.0;
    double mean_step_seconds = 0.0;
};

struct SimulationReport {
    std::string heuristic;
    std::vector<ScenarioRow> rows;
    double average_gap_percent = 0.0;  // over rows with defined gap
    long excluded_nonpositive = 0;
    double mean_step_seconds = 0.0;

    // One row per scenario plus a summary row; zero_times replaces the
    // seconds column with 0 for byte-reproducible output.
    void write_csv(std::ostream& os, bool zero_times = false) const;
};

SimulationReport monte_carlo(const DecomposablePomdp& dec, HeuristicKind kind, long num_scenarios,
                             std::uint64_t master_seed, const SolveOptions& options = {});

}  // namespace pomdp
