#pragma once

#include <optional>
#include <string>

#include "pomdp/milp.hpp"
#include "pomdp/model.hpp"
#include "pomdp/oracle.hpp"

namespace pomdp {

// Occupancy-measure variable families of the exact formulation, extracted
// from a solve. Indices follow the instance; t runs over [0, horizon).
struct OccupancyMeasures {
    int horizon = 0, num_states = 0, num_observations = 0, num_actions = 0;
    bool has_pairs = false;
    std::vector<double> mu_s;     // [t][s]
    std::vector<double> mu_sa;    // [t][s][a]
    std::vector<double> mu_soa;   // [t][s][o][a]
    std::vector<double> mu_pair;  // [t-1][s'][a'][s][o][a], t >= 1

    double s_at(int t, int s) const { return mu_s[static_cast<std::size_t>(t) * num_states + s]; }
    double sa_at(int t, int s, int a) const {
        return mu_sa[(static_cast<std::size_t>(t) * num_states + s) * num_actions + a];
    }
    double soa_at(int t, int s, int o, int a) const {
        return mu_soa[((static_cast<std::size_t>(t) * num_states + s) * num_observations + o) * num_actions + a];
    }
};

// Exact MILP for a single POMDP plus the variable index map. Variable
// blocks are ordered mu_s, mu_sa, mu_soa, mu_pair (cuts only), delta last;
// each block is (t, s, o, a) lexicographic and labels are 1-based.
struct PomdpMilpModel {
    MilpProblem problem;
    int horizon = 0, num_states = 0, num_observations = 0, num_actions = 0;
    bool with_cuts = false;

    int var_mu_s(int t, int s) const { return t * num_states + s; }
    int var_mu_sa(int t, int s, int a) const {
        return off_mu_sa_ + (t * num_states + s) * num_actions + a;
    }
    int var_mu_soa(int t, int s, int o, int a) const {
        return off_mu_soa_ + ((t * num_states + s) * num_observations + o) * num_actions + a;
    }
    // t >= 1 (the paper's t >= 2): pairs reference the previous period.
    int var_mu_pair(int t, int sp, int ap, int s, int o, int a) const {
        const int S = num_states, O = num_observations, A = num_actions;
        return off_pair_ + ((((t - 1) * S + sp) * A + ap) * S + s) * O * A + o * A + a;
    }
    int var_delta(int t, int o, int a) const {
        return off_delta_ + (t * num_observations + o) * num_actions + a;
    }

    // label -> column, serialized for audit.
    std::string index_map_json() const;

    int off_mu_sa_ = 0, off_mu_soa_ = 0, off_pair_ = 0, off_delta_ = 0;
};

PomdpMilpModel build_pomdp_milp(const PomdpInstance& inst, bool with_cuts);

// Reads the delta block of an incumbent, rounds to {0,1}; throws
// NonIntegralIncumbent if an entry sits more than 1e-4 from both.
Policy extract_policy(const PomdpInstance& inst, const MilpResult& result, const PomdpMilpModel& model);

OccupancyMeasures extract_measures(const PomdpMilpModel& model, const std::vector<double>& values);

struct RelaxationResult {
    double z_lr = 0.0;
    OccupancyMeasures measures;
    LpSolution solution;
};

RelaxationResult solve_relaxation(const PomdpInstance& inst, bool with_cuts,
                                  long iteration_limit = 50'000'000);

// Full variable assignment for a deterministic policy following the
// plug-in construction (mu from the forward recursion, mu_pair =
// delta * p(o|s) * p(s|s',a') * mu_sa^{t-1}); used to check cut validity.
std::vector<double> assignment_from_policy(const PomdpInstance& inst, const Policy& policy,
                                           const PomdpMilpModel& model);

}  // namespace pomdp
