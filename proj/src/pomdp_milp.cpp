#include "pomdp/pomdp_milp.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace pomdp {

namespace {

std::string lbl(const char* base, std::initializer_list<int> idx) {
    std::ostringstream os;
    os << base;
    for (int i : idx) os << "[" << i << "]";
    return os.str();
}

}  // namespace

PomdpMilpModel build_pomdp_milp(const PomdpInstance& inst, bool with_cuts) {
    const int T = inst.horizon, S = inst.num_states, O = inst.num_observations, A = inst.num_actions;
    PomdpMilpModel md;
    md.horizon = T;
    md.num_states = S;
    md.num_observations = O;
    md.num_actions = A;
    md.with_cuts = with_cuts;

    const long long pair_count = with_cuts ? static_cast<long long>(T - 1) * S * A * S * O * A : 0;
    const long long total = static_cast<long long>(T) * S + static_cast<long long>(T) * S * A +
                            static_cast<long long>(T) * S * O * A + pair_count +
                            static_cast<long long>(T) * O * A;
    if (total > 10'000'000) {
        std::ostringstream os;
        os << "formulation needs " << total << " variables (limit 1e7)";
        throw ProductTooLarge(os.str());
    }

    LpProblem& lp = md.problem.base;
    lp.variables.reserve(static_cast<std::size_t>(total));
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s) lp.add_variable(lbl("mu", {t + 1, s + 1}));
    md.off_mu_sa_ = lp.num_variables();
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) lp.add_variable(lbl("mu", {t + 1, s + 1, a + 1}));
    md.off_mu_soa_ = lp.num_variables();
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s)
            for (int o = 0; o < O; ++o)
                for (int a = 0; a < A; ++a) lp.add_variable(lbl("mu", {t + 1, s + 1, o + 1, a + 1}));
    md.off_pair_ = lp.num_variables();
    if (with_cuts)
        for (int t = 1; t < T; ++t)
            for (int sp = 0; sp < S; ++sp)
                for (int ap = 0; ap < A; ++ap)
                    for (int s = 0; s < S; ++s)
                        for (int o = 0; o < O; ++o)
                            for (int a = 0; a < A; ++a)
                                lp.add_variable(lbl("mupair", {t + 1, sp + 1, ap + 1, s + 1, o + 1, a + 1}));
    md.off_delta_ = lp.num_variables();
    for (int t = 0; t < T; ++t)
        for (int o = 0; o < O; ++o)
            for (int a = 0; a < A; ++a) {
                int j = lp.add_variable(lbl("delta", {t + 1, o + 1, a + 1}), 0.0, 1.0);
                md.problem.binaries.push_back(j);
            }

    // (3a) objective: sum_t sum_{s,a} [sum_{s'} r p] mu_sa
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) lp.set_objective(md.var_mu_sa(t, s, a), inst.expected_reward(s, a));

    // (3b) initial distribution
    for (int s = 0; s < S; ++s)
        lp.add_constraint(lbl("init", {s + 1}), {{md.var_mu_s(0, s), 1.0}}, Relation::Equal, inst.initial[s]);

    // (3c) state flow, defines mu_s^{t+1} for t in [T-1]
    for (int t = 0; t + 1 < T; ++t)
        for (int s2 = 0; s2 < S; ++s2) {
            std::vector<std::pair<int, double>> row;
            row.reserve(static_cast<std::size_t>(S) * A + 1);
            row.emplace_back(md.var_mu_s(t + 1, s2), 1.0);
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    double p = inst.trans(s, a, s2);
                    if (p != 0.0) row.emplace_back(md.var_mu_sa(t, s, a), -p);
                }
            lp.add_constraint(lbl("flow", {t + 2, s2 + 1}), std::move(row), Relation::Equal, 0.0);
        }

    // (3d) observation consistency
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                std::vector<std::pair<int, double>> row;
                row.reserve(static_cast<std::size_t>(O) + 1);
                row.emplace_back(md.var_mu_sa(t, s, a), 1.0);
                for (int o = 0; o < O; ++o) row.emplace_back(md.var_mu_soa(t, s, o, a), -1.0);
                lp.add_constraint(lbl("obs", {t + 1, s + 1, a + 1}), std::move(row), Relation::Equal, 0.0);
            }

    // Observation marginalization: sum_a mu_soa = p(o|s) mu_s. A valid
    // identity for every policy-induced distribution (the analogue of the
    // fluid row (8e)); it pins total occupancy mass to 1 per period, which
    // makes the linear relaxation coincide with the fully-observed
    // occupancy LP as section 2.4 asserts. Without it the McCormick rows
    // alone let fractional solutions inflate the measure mass.
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s)
            for (int o = 0; o < O; ++o) {
                std::vector<std::pair<int, double>> row;
                row.reserve(static_cast<std::size_t>(A) + 1);
                for (int a = 0; a < A; ++a) row.emplace_back(md.var_mu_soa(t, s, o, a), 1.0);
                row.emplace_back(md.var_mu_s(t, s), -inst.emit(s, o));
                lp.add_constraint(lbl("obsmass", {t + 1, s + 1, o + 1}), std::move(row), Relation::Equal,
                                  0.0);
            }

    // (3e)-(3g) McCormick linearization of mu_soa = delta * p(o|s) * mu_s
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s)
            for (int o = 0; o < O; ++o) {
                const double p = inst.emit(s, o);
                for (int a = 0; a < A; ++a) {
                    lp.add_constraint(lbl("mc1", {t + 1, s + 1, o + 1, a + 1}),
                                      {{md.var_mu_soa(t, s, o, a), 1.0}, {md.var_mu_s(t, s), -p}},
                                      Relation::LessEq, 0.0);
                    lp.add_constraint(lbl("mc2", {t + 1, s + 1, o + 1, a + 1}),
                                      {{md.var_mu_soa(t, s, o, a), 1.0}, {md.var_delta(t, o, a), -1.0}},
                                      Relation::LessEq, 0.0);
                    lp.add_constraint(lbl("mc3", {t + 1, s + 1, o + 1, a + 1}),
                                      {{md.var_mu_s(t, s), p},
                                       {md.var_delta(t, o, a), p},
                                       {md.var_mu_soa(t, s, o, a), -1.0}},
                                      Relation::LessEq, p);
                }
            }

    // (3h) one action per observation
    for (int t = 0; t < T; ++t)
        for (int o = 0; o < O; ++o) {
            std::vector<std::pair<int, double>> row;
            row.reserve(static_cast<std::size_t>(A));
            for (int a = 0; a < A; ++a) row.emplace_back(md.var_delta(t, o, a), 1.0);
            lp.add_constraint(lbl("policy", {t + 1, o + 1}), std::move(row), Relation::Equal, 1.0);
        }

    if (with_cuts) {
        for (int t = 1; t < T; ++t) {
            // (4a)
            for (int s = 0; s < S; ++s)
                for (int o = 0; o < O; ++o)
                    for (int a = 0; a < A; ++a) {
                        std::vector<std::pair<int, double>> row;
                        row.reserve(static_cast<std::size_t>(S) * A + 1);
                        for (int sp = 0; sp < S; ++sp)
                            for (int ap = 0; ap < A; ++ap)
                                row.emplace_back(md.var_mu_pair(t, sp, ap, s, o, a), 1.0);
                        row.emplace_back(md.var_mu_soa(t, s, o, a), -1.0);
                        lp.add_constraint(lbl("cuta", {t + 1, s + 1, o + 1, a + 1}), std::move(row),
                                          Relation::Equal, 0.0);
                    }
            // (4b)
            for (int sp = 0; sp < S; ++sp)
                for (int ap = 0; ap < A; ++ap)
                    for (int s = 0; s < S; ++s)
                        for (int o = 0; o < O; ++o) {
                            std::vector<std::pair<int, double>> row;
                            row.reserve(static_cast<std::size_t>(A) + 1);
                            for (int a = 0; a < A; ++a)
                                row.emplace_back(md.var_mu_pair(t, sp, ap, s, o, a), 1.0);
                            const double coef = inst.emit(s, o) * inst.trans(sp, ap, s);
                            row.emplace_back(md.var_mu_sa(t - 1, sp, ap), -coef);
                            lp.add_constraint(lbl("cutb", {t + 1, sp + 1, ap + 1, s + 1, o + 1}),
                                              std::move(row), Relation::Equal, 0.0);
                        }
            // (4c) with the Bayes posterior; an all-zero posterior reads
            // mu_pair = 0, consistent with (4b) on impossible events.
            for (int sp = 0; sp < S; ++sp)
                for (int ap = 0; ap < A; ++ap)
                    for (int o = 0; o < O; ++o) {
                        const std::vector<double> q = conditional_state_given_obs(inst, sp, ap, o);
                        for (int s = 0; s < S; ++s)
                            for (int a = 0; a < A; ++a) {
                                std::vector<std::pair<int, double>> row;
                                row.reserve(static_cast<std::size_t>(S));
                                for (int sb = 0; sb < S; ++sb) {
                                    double c = (sb == s ? 1.0 : 0.0) - q[s];
                                    if (c != 0.0) row.emplace_back(md.var_mu_pair(t, sp, ap, sb, o, a), c);
                                }
                                lp.add_constraint(lbl("cutc", {t + 1, sp + 1, ap + 1, s + 1, o + 1, a + 1}),
                                                  std::move(row), Relation::Equal, 0.0);
                            }
                    }
        }
    }
    return md;
}

Policy extract_policy(const PomdpInstance& inst, const MilpResult& result, const PomdpMilpModel& model) {
    if (!result.has_incumbent()) throw Error("MILP result has no incumbent to extract a policy from");
    Policy pol;
    pol.horizon = model.horizon;
    pol.num_observations = model.num_observations;
    pol.num_actions = model.num_actions;
    pol.deterministic = true;
    pol.rules.assign(static_cast<std::size_t>(model.horizon) * model.num_observations * model.num_actions, 0.0);
    for (int t = 0; t < model.horizon; ++t)
        for (int o = 0; o < model.num_observations; ++o)
            for (int a = 0; a < model.num_actions; ++a) {
                double v = result.incumbent_values[model.var_delta(t, o, a)];
                double r = std::round(v);
                if (std::fabs(v - r) > 1e-4) {
                    std::ostringstream os;
                    os << "delta[" << t + 1 << "][" << o + 1 << "][" << a + 1 << "] = " << v
                       << " is not within 1e-4 of {0,1}";
                    throw NonIntegralIncumbent(os.str());
                }
                pol.rule(t, o, a) = r;
            }
    (void)inst;
    return validate_policy(std::move(pol));
}

OccupancyMeasures extract_measures(const PomdpMilpModel& model, const std::vector<double>& values) {
    const int T = model.horizon, S = model.num_states, O = model.num_observations, A = model.num_actions;
    OccupancyMeasures m;
    m.horizon = T;
    m.num_states = S;
    m.num_observations = O;
    m.num_actions = A;
    m.has_pairs = model.with_cuts;
    m.mu_s.resize(static_cast<std::size_t>(T) * S);
    m.mu_sa.resize(static_cast<std::size_t>(T) * S * A);
    m.mu_soa.resize(static_cast<std::size_t>(T) * S * O * A);
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s) {
            m.mu_s[static_cast<std::size_t>(t) * S + s] = values[model.var_mu_s(t, s)];
            for (int a = 0; a < A; ++a) {
                m.mu_sa[(static_cast<std::size_t>(t) * S + s) * A + a] = values[model.var_mu_sa(t, s, a)];
                for (int o = 0; o < O; ++o)
                    m.mu_soa[((static_cast<std::size_t>(t) * S + s) * O + o) * A + a] =
                        values[model.var_mu_soa(t, s, o, a)];
            }
        }
    if (model.with_cuts) {
        m.mu_pair.resize(static_cast<std::size_t>(T - 1) * S * A * S * O * A);
        std::size_t k = 0;
        for (int t = 1; t < T; ++t)
            for (int sp = 0; sp < S; ++sp)
                for (int ap = 0; ap < A; ++ap)
                    for (int s = 0; s < S; ++s)
                        for (int o = 0; o < O; ++o)
                            for (int a = 0; a < A; ++a)
                                m.mu_pair[k++] = values[model.var_mu_pair(t, sp, ap, s, o, a)];
    }
    return m;
}

RelaxationResult solve_relaxation(const PomdpInstance& inst, bool with_cuts, long iteration_limit) {
    PomdpMilpModel md = build_pomdp_milp(inst, with_cuts);
    RelaxationResult out;
    out.solution = root_relaxation(md.problem, iteration_limit);
    if (out.solution.status != LpStatus::Optimal)
        throw Error(std::string("relaxation did not solve to optimality: ") + to_string(out.solution.status));
    out.z_lr = out.solution.objective;
    out.measures = extract_measures(md, out.solution.primal);
    return out;
}

std::vector<double> assignment_from_policy(const PomdpInstance& inst, const Policy& policy,
                                           const PomdpMilpModel& model) {
    const int T = model.horizon, S = model.num_states, O = model.num_observations, A = model.num_actions;
    ForwardDistribution fd = occupancy_from_policy(inst, policy);
    std::vector<double> x(static_cast<std::size_t>(model.problem.base.num_variables()), 0.0);
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < S; ++s) {
            x[model.var_mu_s(t, s)] = fd.s_at(t, s);
            for (int a = 0; a < A; ++a) {
                x[model.var_mu_sa(t, s, a)] = fd.sa_at(t, s, a);
                for (int o = 0; o < O; ++o) x[model.var_mu_soa(t, s, o, a)] = fd.soa_at(t, s, o, a);
            }
        }
    for (int t = 0; t < T; ++t)
        for (int o = 0; o < O; ++o)
            for (int a = 0; a < A; ++a) x[model.var_delta(t, o, a)] = policy.rule(t, o, a);
    if (model.with_cuts)
        for (int t = 1; t < T; ++t)
            for (int sp = 0; sp < S; ++sp)
                for (int ap = 0; ap < A; ++ap)
                    for (int s = 0; s < S; ++s)
                        for (int o = 0; o < O; ++o)
                            for (int a = 0; a < A; ++a)
                                x[model.var_mu_pair(t, sp, ap, s, o, a)] =
                                    policy.rule(t, o, a) * inst.emit(s, o) * inst.trans(sp, ap, s) *
                                    fd.sa_at(t - 1, sp, ap);
    return x;
}

std::string PomdpMilpModel::index_map_json() const {
    nlohmann::ordered_json j;
    for (int i = 0; i < problem.base.num_variables(); ++i) j[problem.base.variables[i].label] = i;
    return j.dump(1);
}

}  // namespace pomdp
