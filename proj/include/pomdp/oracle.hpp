#pragma once

#include "pomdp/model.hpp"

namespace pomdp {

// Occupancy measures computed by exact forward recursion instead of an LP:
//   mu_s^1 = p(s),  mu_soa^t = delta^t(a|o) p(o|s) mu_s^t,
//   mu_sa^t = sum_o mu_soa^t,  mu_s^{t+1} = sum_{s,a} p(s'|s,a) mu_sa^t.
struct ForwardDistribution {
    int horizon = 0, num_states = 0, num_observations = 0, num_actions = 0;
    std::vector<double> mu_s;    // [t][s]
    std::vector<double> mu_sa;   // [t][s][a]
    std::vector<double> mu_soa;  // [t][s][o][a]

    double s_at(int t, int s) const { return mu_s[static_cast<std::size_t>(t) * num_states + s]; }
    double sa_at(int t, int s, int a) const {
        return mu_sa[(static_cast<std::size_t>(t) * num_states + s) * num_actions + a];
    }
    double soa_at(int t, int s, int o, int a) const {
        return mu_soa[((static_cast<std::size_t>(t) * num_states + s) * num_observations + o) * num_actions + a];
    }
};

ForwardDistribution occupancy_from_policy(const PomdpInstance& inst, const Policy& policy);

// Expected total reward of a (possibly stochastic) memoryless policy.
double exact_policy_value(const PomdpInstance& inst, const Policy& policy);

struct BruteForceResult {
    double value = 0.0;
    Policy policy;
    long enumerated = 0;
};

// Exhaustive search over deterministic memoryless time-dependent policies.
// Ties resolved to the lexicographically smallest policy ((t,o) row-major,
// ascending action). Throws SearchSpaceTooLarge beyond 1e6 policies.
BruteForceResult brute_force_memoryless(const PomdpInstance& inst);

// Finite-horizon fully-observed value by backward induction.
double mdp_value(const PomdpInstance& inst);

// Perfect-recall optimum by belief-state dynamic programming over the exact
// reachable belief tree. Throws SearchSpaceTooLarge when (|O||A|)^T > 1e5.
double perfect_recall_value(const PomdpInstance& inst);

}  // namespace pomdp
