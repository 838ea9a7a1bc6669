#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "pomdp/errors.hpp"

namespace pomdp {

// Row-stochastic tolerances: 1e-9 on load/validate; generated rows are
// renormalized exactly before validation.
inline constexpr double kStochasticTol = 1e-9;

// Finite-horizon POMDP with dense probability tensors. Immutable once
// validated; all operations on it are pure functions.
struct PomdpInstance {
    int num_states = 0;
    int num_observations = 0;
    int num_actions = 0;
    int horizon = 0;
    std::vector<double> initial;     // [s]
    std::vector<double> transition;  // [s][a][s']
    std::vector<double> emission;    // [s][o]
    std::vector<double> reward;      // [s][a][s']

    double trans(int s, int a, int s2) const {
        return transition[(static_cast<std::size_t>(s) * num_actions + a) * num_states + s2];
    }
    double emit(int s, int o) const {
        return emission[static_cast<std::size_t>(s) * num_observations + o];
    }
    double rew(int s, int a, int s2) const {
        return reward[(static_cast<std::size_t>(s) * num_actions + a) * num_states + s2];
    }
    const double* trans_row(int s, int a) const {
        return transition.data() + (static_cast<std::size_t>(s) * num_actions + a) * num_states;
    }
    const double* rew_row(int s, int a) const {
        return reward.data() + (static_cast<std::size_t>(s) * num_actions + a) * num_states;
    }
    // Expected immediate reward of (s,a): sum_s' p(s'|s,a) r(s,a,s').
    double expected_reward(int s, int a) const;
};

// M component POMDPs sharing one action space and horizon, coupled only
// through the action.
struct DecomposablePomdp {
    int num_actions = 0;
    int horizon = 0;
    std::vector<PomdpInstance> components;

    int num_components() const { return static_cast<int>(components.size()); }
};

// Time-indexed stochastic decision rule delta^t(a|o). Deterministic
// policies are the 0/1 members.
struct Policy {
    int horizon = 0;
    int num_observations = 0;
    int num_actions = 0;
    std::vector<double> rules;  // [t][o][a], t in [0, horizon)
    bool deterministic = false;

    double rule(int t, int o, int a) const {
        return rules[(static_cast<std::size_t>(t) * num_observations + o) * num_actions + a];
    }
    double& rule(int t, int o, int a) {
        return rules[(static_cast<std::size_t>(t) * num_observations + o) * num_actions + a];
    }
    // For deterministic policies: the action chosen at (t,o).
    int action_at(int t, int o) const;
};

// Per-component probability vectors over states.
struct Belief {
    std::vector<std::vector<double>> components;
};

struct Dims {
    int states = 0;
    int observations = 0;
    int actions = 0;
    int horizon = 0;
};

// Validation: checks dimensions, nonnegativity, row-stochasticity (1e-9),
// finite rewards. Returns the instance by value so callers keep immutable
// validated copies. Throws NonStochasticRow, NegativeProbability,
// DimensionMismatch, NonFiniteReward.
PomdpInstance validate_instance(PomdpInstance raw);
DecomposablePomdp validate_decomposable(DecomposablePomdp raw);
Policy validate_policy(Policy raw);
void validate_belief(const Belief& b, const DecomposablePomdp& dec);

// Product-space instance of a decomposable POMDP. Joint indices are
// row-major with component 1 most significant. Throws ProductTooLarge when
// any produced tensor would exceed 1e7 cells.
PomdpInstance compose(const DecomposablePomdp& dec);

// Joint index helpers for the composed encoding.
int joint_index(const std::vector<int>& per_component, const std::vector<int>& sizes);
std::vector<int> split_joint_index(int joint, const std::vector<int>& sizes);

// Seeded random instance: probability rows are i.i.d. uniform(0,1) entries
// renormalized per row, rewards i.i.d. uniform(0,1). Deterministic function
// of (seed, dims); see rng.hpp for the generator contract.
PomdpInstance generate_random_instance(std::uint64_t seed, const Dims& dims);

// Component m uses sub-seed CounterRng::derive(seed, m).
DecomposablePomdp generate_random_decomposable(std::uint64_t seed, int num_components, const Dims& dims);

struct PolicyCount {
    boost::multiprecision::cpp_int count;  // |A|^(|O| * T)
    long exponent = 0;                     // floor(log10(count))
    std::string decimal() const { return count.str(); }
};

PolicyCount count_deterministic_policies(int num_obs, int num_actions, int horizon);

// Bayes posterior p(s | s', a', o) over current states s given previous
// state s', previous action a', and current observation o:
//   p(o|s) p(s|s',a') / sum_sbar p(o|sbar) p(sbar|s',a').
// All-zero vector when the denominator is zero (impossible event).
std::vector<double> conditional_state_given_obs(const PomdpInstance& inst, int s_prev, int a_prev, int o);

}  // namespace pomdp
