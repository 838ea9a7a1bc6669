#include "pomdp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pomdp/kernels.hpp"

namespace pomdp {

namespace {

void check_match(const PomdpInstance& inst, const Policy& policy) {
    if (policy.horizon != inst.horizon || policy.num_observations != inst.num_observations ||
        policy.num_actions != inst.num_actions)
        throw DimensionMismatch("policy dimensions do not match the instance");
}

}  // namespace

ForwardDistribution occupancy_from_policy(const PomdpInstance& inst, const Policy& policy) {
    check_match(inst, policy);
    const int T = inst.horizon, S = inst.num_states, O = inst.num_observations, A = inst.num_actions;
    ForwardDistribution fd;
    fd.horizon = T;
    fd.num_states = S;
    fd.num_observations = O;
    fd.num_actions = A;
    fd.mu_s.assign(static_cast<std::size_t>(T) * S, 0.0);
    fd.mu_sa.assign(static_cast<std::size_t>(T) * S * A, 0.0);
    fd.mu_soa.assign(static_cast<std::size_t>(T) * S * O * A, 0.0);

    for (int s = 0; s < S; ++s) fd.mu_s[s] = inst.initial[s];
    for (int t = 0; t < T; ++t) {
        double* mu_s = fd.mu_s.data() + static_cast<std::size_t>(t) * S;
        double* mu_sa = fd.mu_sa.data() + static_cast<std::size_t>(t) * S * A;
        double* mu_soa = fd.mu_soa.data() + static_cast<std::size_t>(t) * S * O * A;
        for (int s = 0; s < S; ++s)
            for (int o = 0; o < O; ++o) {
                const double w = inst.emit(s, o) * mu_s[s];
                for (int a = 0; a < A; ++a) {
                    const double v = policy.rule(t, o, a) * w;
                    mu_soa[(static_cast<std::size_t>(s) * O + o) * A + a] = v;
                    mu_sa[static_cast<std::size_t>(s) * A + a] += v;
                }
            }
        if (t + 1 < T) {
            double* next = fd.mu_s.data() + static_cast<std::size_t>(t + 1) * S;
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a)
                    kern::axpy(next, mu_sa[static_cast<std::size_t>(s) * A + a], inst.trans_row(s, a),
                               static_cast<std::size_t>(S));
        }
    }
    return fd;
}

double exact_policy_value(const PomdpInstance& inst, const Policy& policy) {
    ForwardDistribution fd = occupancy_from_policy(inst, policy);
    double total = 0.0;
    for (int t = 0; t < inst.horizon; ++t)
        for (int s = 0; s < inst.num_states; ++s)
            for (int a = 0; a < inst.num_actions; ++a)
                total += inst.expected_reward(s, a) * fd.sa_at(t, s, a);
    return total;
}

BruteForceResult brute_force_memoryless(const PomdpInstance& inst) {
    const int T = inst.horizon, S = inst.num_states, O = inst.num_observations, A = inst.num_actions;
    PolicyCount pc = count_deterministic_policies(O, A, T);
    if (pc.count > 1'000'000)
        throw SearchSpaceTooLarge("brute force would enumerate " + pc.decimal() + " policies (limit 1e6)");

    // R(s,a) reused across all policies.
    std::vector<double> R(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) R[static_cast<std::size_t>(s) * A + a] = inst.expected_reward(s, a);

    const int digits_n = T * O;  // digit (t,o), row-major, leftmost most significant
    std::vector<int> digits(static_cast<std::size_t>(digits_n), 0);
    std::vector<double> mu_s(static_cast<std::size_t>(S)), mu_sa(static_cast<std::size_t>(S) * A),
        next(static_cast<std::size_t>(S));

    BruteForceResult best;
    best.value = -std::numeric_limits<double>::infinity();
    std::vector<int> best_digits;
    long count = 0;
    for (;;) {
        ++count;
        for (int s = 0; s < S; ++s) mu_s[s] = inst.initial[s];
        double value = 0.0;
        for (int t = 0; t < T; ++t) {
            std::fill(mu_sa.begin(), mu_sa.end(), 0.0);
            for (int s = 0; s < S; ++s)
                for (int o = 0; o < O; ++o) {
                    const int a = digits[static_cast<std::size_t>(t) * O + o];
                    mu_sa[static_cast<std::size_t>(s) * A + a] += inst.emit(s, o) * mu_s[s];
                }
            value += kern::dot(mu_sa.data(), R.data(), mu_sa.size());
            if (t + 1 < T) {
                std::fill(next.begin(), next.end(), 0.0);
                for (int s = 0; s < S; ++s)
                    for (int a = 0; a < A; ++a) {
                        const double m = mu_sa[static_cast<std::size_t>(s) * A + a];
                        if (m != 0.0) kern::axpy(next.data(), m, inst.trans_row(s, a), static_cast<std::size_t>(S));
                    }
                mu_s.swap(next);
            }
        }
        if (value > best.value) {
            best.value = value;
            best_digits = digits;
        }
        int pos = digits_n - 1;
        while (pos >= 0 && digits[pos] == A - 1) digits[pos--] = 0;
        if (pos < 0) break;
        ++digits[pos];
    }
    best.enumerated = count;
    best.policy.horizon = T;
    best.policy.num_observations = O;
    best.policy.num_actions = A;
    best.policy.deterministic = true;
    best.policy.rules.assign(static_cast<std::size_t>(T) * O * A, 0.0);
    for (int t = 0; t < T; ++t)
        for (int o = 0; o < O; ++o)
            best.policy.rule(t, o, best_digits[static_cast<std::size_t>(t) * O + o]) = 1.0;
    return best;
}

double mdp_value(const PomdpInstance& inst) {
    const int T = inst.horizon, S = inst.num_states, A = inst.num_actions;
    std::vector<double> V(static_cast<std::size_t>(S), 0.0), next(static_cast<std::size_t>(S));
    std::vector<double> tmp(static_cast<std::size_t>(S));
    for (int t = T - 1; t >= 0; --t) {
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < A; ++a) {
                const double* p = inst.trans_row(s, a);
                const double* r = inst.rew_row(s, a);
                for (int s2 = 0; s2 < S; ++s2) tmp[s2] = r[s2] + V[s2];
                double q = kern::dot(p, tmp.data(), static_cast<std::size_t>(S));
                if (q > best) best = q;
            }
            next[s] = best;
        }
        V.swap(next);
    }
    return kern::dot(inst.initial.data(), V.data(), static_cast<std::size_t>(S));
}

namespace {

double pr_value(const PomdpInstance& inst, const std::vector<double>& prior, int t) {
    if (t == inst.horizon) return 0.0;
    const int S = inst.num_states, O = inst.num_observations, A = inst.num_actions;
    double total = 0.0;
    std::vector<double> post(static_cast<std::size_t>(S)), pred(static_cast<std::size_t>(S));
    for (int o = 0; o < O; ++o) {
        double po = 0.0;
        for (int s = 0; s < S; ++s) po += inst.emit(s, o) * prior[s];
        if (po <= 0.0) continue;
        for (int s = 0; s < S; ++s) post[s] = inst.emit(s, o) * prior[s] / po;
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < A; ++a) {
            double imm = 0.0;
            for (int s = 0; s < S; ++s) imm += post[s] * inst.expected_reward(s, a);
            std::fill(pred.begin(), pred.end(), 0.0);
            for (int s = 0; s < S; ++s)
                if (post[s] != 0.0) kern::axpy(pred.data(), post[s], inst.trans_row(s, a), static_cast<std::size_t>(S));
            double q = imm + pr_value(inst, pred, t + 1);
            if (q > best) best = q;
        }
        total += po * best;
    }
    return total;
}

}  // namespace

double perfect_recall_value(const PomdpInstance& inst) {
    double branches = static_cast<double>(inst.num_observations) * inst.num_actions;
    double paths = std::pow(branches, inst.horizon);
    if (!(paths <= 1e5))
        throw SearchSpaceTooLarge("perfect recall tree has ~" + std::to_string(paths) + " paths (limit 1e5)");
    return pr_value(inst, inst.initial, 0);
}

}  // namespace pomdp
