#pragma once

#include <optional>
#include <string>

#include "pomdp/lp.hpp"
#include "pomdp/model.hpp"

namespace pomdp {

// Per-component fluid measures tau plus the shared action marginal tau_a.
struct FluidMeasures {
    int horizon = 0, num_components = 0, num_actions = 0;
    std::vector<int> states_of;        // per component
    std::vector<int> observations_of;  // per component
    bool has_pairs = false;
    std::vector<std::vector<double>> tau_s;    // [m] -> [t][s]
    std::vector<std::vector<double>> tau_sa;   // [m] -> [t][s][a]
    std::vector<std::vector<double>> tau_soa;  // [m] -> [t][s][o][a]
    std::vector<double> tau_a;                 // [t][a]
    std::vector<std::vector<double>> tau_pair; // [m] -> [t-1][s'][a'][s][o][a]

    double s_at(int t, int m, int s) const { return tau_s[m][static_cast<std::size_t>(t) * states_of[m] + s]; }
    double sa_at(int t, int m, int s, int a) const {
        return tau_sa[m][(static_cast<std::size_t>(t) * states_of[m] + s) * num_actions + a];
    }
    double soa_at(int t, int m, int s, int o, int a) const {
        return tau_soa[m][((static_cast<std::size_t>(t) * states_of[m] + s) * observations_of[m] + o) *
                              num_actions +
                          a];
    }
    double a_at(int t, int a) const { return tau_a[static_cast<std::size_t>(t) * num_actions + a]; }
};

// Fluid LP plus index map. Variable blocks: tau_s, tau_sa, tau_soa, tau_a,
// tau_pair (cuts only); labels tau[t][m][s] etc., 1-based.
struct FluidModel {
    LpProblem problem;
    int horizon = 0, num_components = 0, num_actions = 0;
    std::vector<int> states_of, observations_of;
    bool with_cuts = false;
    std::optional<std::vector<int>> conditioned_observation;  // 0-based per component

    int var_tau_s(int t, int m, int s) const { return t * sum_s_ + pref_s_[m] + s; }
    int var_tau_sa(int t, int m, int s, int a) const {
        return off_sa_ + t * sum_s_ * num_actions + (pref_s_[m] + s) * num_actions + a;
    }
    int var_tau_soa(int t, int m, int s, int o, int a) const {
        return off_soa_ + t * sum_soa_ + pref_soa_[m] + (s * observations_of[m] + o) * num_actions + a;
    }
    int var_tau_a(int t, int a) const { return off_a_ + t * num_actions + a; }
    int var_tau_pair(int t, int m, int sp, int ap, int s, int o, int a) const {
        const int S = states_of[m], O = observations_of[m], A = num_actions;
        return off_pair_ + (t - 1) * sum_pair_ + pref_pair_[m] +
               ((((sp * A + ap) * S + s) * O + o) * A + a);
    }

    std::string index_map_json() const;

    int sum_s_ = 0, sum_soa_ = 0, sum_pair_ = 0;
    std::vector<int> pref_s_, pref_soa_, pref_pair_;
    int off_sa_ = 0, off_soa_ = 0, off_a_ = 0, off_pair_ = 0;
};

// Fluid LP for a decomposable POMDP; when initial_obs is given, the t=1
// observation-independence rows use the indicator of the observed value in
// place of the emission probabilities.
FluidModel build_fluid_lp(const DecomposablePomdp& dec, bool with_cuts,
                          const std::optional<std::vector<int>>& initial_obs = std::nullopt);

FluidMeasures extract_fluid_measures(const FluidModel& model, const std::vector<double>& values);

struct FluidSolveReport {
    double objective = 0.0;  // z_M
    FluidMeasures measures;
    bool with_cuts = false;
    std::optional<std::vector<int>> conditioned_observation;
    double wall_seconds = 0.0;
    LpSolution solution;
};

FluidSolveReport solve_fluid(const DecomposablePomdp& dec, bool with_cuts,
                             const std::optional<std::vector<int>>& initial_obs = std::nullopt,
                             long iteration_limit = 50'000'000);

// Achievability test: the ratios tau_soa / sum_a tau_soa must be constant
// over states with positive denominator (per component and observation)
// and identical across components at every joint observation. Returns the
// reconstructed joint-observation policy, or nothing. Cells never pinned
// by any component fall back to the first action.
std::optional<Policy> check_achievable(const DecomposablePomdp& dec, const FluidMeasures& measures,
                                       double tolerance = 1e-6);

// argmax_a tau_a^1, lowest index on ties (0-based).
int extract_first_action(const FluidMeasures& measures);

}  // namespace pomdp
