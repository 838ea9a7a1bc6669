#include "pomdp/fluid.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "pomdp/kernels.hpp"

namespace pomdp {

namespace {

std::string lbl(const char* base, std::initializer_list<int> idx) {
    std::ostringstream os;
    os << base;
    for (int i : idx) os << "[" << i << "]";
    return os.str();
}

}  // namespace

FluidModel build_fluid_lp(const DecomposablePomdp& dec, bool with_cuts,
                          const std::optional<std::vector<int>>& initial_obs) {
    const int M = dec.num_components(), T = dec.horizon, A = dec.num_actions;
    FluidModel md;
    md.horizon = T;
    md.num_components = M;
    md.num_actions = A;
    md.with_cuts = with_cuts;
    md.conditioned_observation = initial_obs;
    md.states_of.resize(M);
    md.observations_of.resize(M);
    md.pref_s_.resize(M);
    md.pref_soa_.resize(M);
    md.pref_pair_.resize(M);
    for (int m = 0; m < M; ++m) {
        md.states_of[m] = dec.components[m].num_states;
        md.observations_of[m] = dec.components[m].num_observations;
        md.pref_s_[m] = md.sum_s_;
        md.pref_soa_[m] = md.sum_soa_;
        md.pref_pair_[m] = md.sum_pair_;
        md.sum_s_ += md.states_of[m];
        md.sum_soa_ += md.states_of[m] * md.observations_of[m] * A;
        md.sum_pair_ += md.states_of[m] * A * md.states_of[m] * md.observations_of[m] * A;
    }
    if (initial_obs) {
        if (static_cast<int>(initial_obs->size()) != M)
            throw DimensionMismatch("initial observation needs one index per component");
        for (int m = 0; m < M; ++m) {
            int o = (*initial_obs)[m];
            if (o < 0 || o >= md.observations_of[m]) {
                std::ostringstream os;
                os << "initial observation " << o + 1 << " out of range for component " << m + 1;
                throw DimensionMismatch(os.str());
            }
        }
    }

    LpProblem& lp = md.problem;
    for (int t = 0; t < T; ++t)
        for (int m = 0; m < M; ++m)
            for (int s = 0; s < md.states_of[m]; ++s) lp.add_variable(lbl("tau", {t + 1, m + 1, s + 1}));
    md.off_sa_ = lp.num_variables();
    for (int t = 0; t < T; ++t)
        for (int m = 0; m < M; ++m)
            for (int s = 0; s < md.states_of[m]; ++s)
                for (int a = 0; a < A; ++a) lp.add_variable(lbl("tau", {t + 1, m + 1, s + 1, a + 1}));
    md.off_soa_ = lp.num_variables();
    for (int t = 0; t < T; ++t)
        for (int m = 0; m < M; ++m)
            for (int s = 0; s < md.states_of[m]; ++s)
                for (int o = 0; o < md.observations_of[m]; ++o)
                    for (int a = 0; a < A; ++a)
                        lp.add_variable(lbl("tau", {t + 1, m + 1, s + 1, o + 1, a + 1}));
    md.off_a_ = lp.num_variables();
    for (int t = 0; t < T; ++t)
        for (int a = 0; a < A; ++a) lp.add_variable(lbl("taua", {t + 1, a + 1}));
    md.off_pair_ = lp.num_variables();
    if (with_cuts)
        for (int t = 1; t < T; ++t)
            for (int m = 0; m < M; ++m)
                for (int sp = 0; sp < md.states_of[m]; ++sp)
                    for (int ap = 0; ap < A; ++ap)
                        for (int s = 0; s < md.states_of[m]; ++s)
                            for (int o = 0; o < md.observations_of[m]; ++o)
                                for (int a = 0; a < A; ++a)
                                    lp.add_variable(
                                        lbl("taupair", {t + 1, m + 1, sp + 1, ap + 1, s + 1, o + 1, a + 1}));

    // (8a) objective
    for (int t = 0; t < T; ++t)
        for (int m = 0; m < M; ++m)
            for (int s = 0; s < md.states_of[m]; ++s)
                for (int a = 0; a < A; ++a)
                    lp.set_objective(md.var_tau_sa(t, m, s, a), dec.components[m].expected_reward(s, a));

    for (int m = 0; m < M; ++m) {
        const PomdpInstance& c = dec.components[m];
        const int S = md.states_of[m], O = md.observations_of[m];
        // (8f) initial
        for (int s = 0; s < S; ++s)
            lp.add_constraint(lbl("init", {m + 1, s + 1}), {{md.var_tau_s(0, m, s), 1.0}}, Relation::Equal,
                              c.initial[s]);
        // (8b) flow for t in [T-1]
        for (int t = 0; t + 1 < T; ++t)
            for (int s2 = 0; s2 < S; ++s2) {
                std::vector<std::pair<int, double>> row;
                row.reserve(static_cast<std::size_t>(S) * A + 1);
                row.emplace_back(md.var_tau_s(t + 1, m, s2), 1.0);
                for (int s = 0; s < S; ++s)
                    for (int a = 0; a < A; ++a) {
                        double p = c.trans(s, a, s2);
                        if (p != 0.0) row.emplace_back(md.var_tau_sa(t, m, s, a), -p);
                    }
                lp.add_constraint(lbl("flow", {t + 2, m + 1, s2 + 1}), std::move(row), Relation::Equal, 0.0);
            }
        // (8c) marginalization over observations
        for (int t = 0; t < T; ++t)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    std::vector<std::pair<int, double>> row;
                    row.reserve(static_cast<std::size_t>(O) + 1);
                    row.emplace_back(md.var_tau_sa(t, m, s, a), 1.0);
                    for (int o = 0; o < O; ++o) row.emplace_back(md.var_tau_soa(t, m, s, o, a), -1.0);
                    lp.add_constraint(lbl("marg", {t + 1, m + 1, s + 1, a + 1}), std::move(row),
                                      Relation::Equal, 0.0);
                }
        // (8d) shared action marginal
        for (int t = 0; t < T; ++t)
            for (int a = 0; a < A; ++a) {
                std::vector<std::pair<int, double>> row;
                row.reserve(static_cast<std::size_t>(S) + 1);
                for (int s = 0; s < S; ++s) row.emplace_back(md.var_tau_sa(t, m, s, a), 1.0);
                row.emplace_back(md.var_tau_a(t, a), -1.0);
                lp.add_constraint(lbl("act", {t + 1, m + 1, a + 1}), std::move(row), Relation::Equal, 0.0);
            }
        // (8e) observation independence; indicator at t=1 when conditioned
        for (int t = 0; t < T; ++t)
            for (int s = 0; s < S; ++s)
                for (int o = 0; o < O; ++o) {
                    double e = c.emit(s, o);
                    if (t == 0 && initial_obs) e = ((*initial_obs)[m] == o) ? 1.0 : 0.0;
                    std::vector<std::pair<int, double>> row;
                    row.reserve(static_cast<std::size_t>(A) + 1);
                    for (int a = 0; a < A; ++a) row.emplace_back(md.var_tau_soa(t, m, s, o, a), 1.0);
                    if (e != 0.0) row.emplace_back(md.var_tau_s(t, m, s), -e);
                    lp.add_constraint(lbl("obsind", {t + 1, m + 1, s + 1, o + 1}), std::move(row),
                                      Relation::Equal, 0.0);
                }
        if (with_cuts) {
            for (int t = 1; t < T; ++t) {
                // (9a)
                for (int s = 0; s < S; ++s)
                    for (int o = 0; o < O; ++o)
                        for (int a = 0; a < A; ++a) {
                            std::vector<std::pair<int, double>> row;
                            row.reserve(static_cast<std::size_t>(S) * A + 1);
                            for (int sp = 0; sp < S; ++sp)
                                for (int ap = 0; ap < A; ++ap)
                                    row.emplace_back(md.var_tau_pair(t, m, sp, ap, s, o, a), 1.0);
                            row.emplace_back(md.var_tau_soa(t, m, s, o, a), -1.0);
                            lp.add_constraint(lbl("cuta", {t + 1, m + 1, s + 1, o + 1, a + 1}), std::move(row),
                                              Relation::Equal, 0.0);
                        }
                // (9b)
                for (int sp = 0; sp < S; ++sp)
                    for (int ap = 0; ap < A; ++ap)
                        for (int s = 0; s < S; ++s)
                            for (int o = 0; o < O; ++o) {
                                std::vector<std::pair<int, double>> row;
                                row.reserve(static_cast<std::size_t>(A) + 1);
                                for (int a = 0; a < A; ++a)
                                    row.emplace_back(md.var_tau_pair(t, m, sp, ap, s, o, a), 1.0);
                                const double coef = c.emit(s, o) * c.trans(sp, ap, s);
                                row.emplace_back(md.var_tau_sa(t - 1, m, sp, ap), -coef);
                                lp.add_constraint(lbl("cutb", {t + 1, m + 1, sp + 1, ap + 1, s + 1, o + 1}),
                                                  std::move(row), Relation::Equal, 0.0);
                            }
                // (9c)
                for (int sp = 0; sp < S; ++sp)
                    for (int ap = 0; ap < A; ++ap)
                        for (int o = 0; o < O; ++o) {
                            const std::vector<double> q = conditional_state_given_obs(c, sp, ap, o);
                            for (int s = 0; s < S; ++s)
                                for (int a = 0; a < A; ++a) {
                                    std::vector<std::pair<int, double>> row;
                                    row.reserve(static_cast<std::size_t>(S));
                                    for (int sb = 0; sb < S; ++sb) {
                                        double cc = (sb == s ? 1.0 : 0.0) - q[s];
                                        if (cc != 0.0)
                                            row.emplace_back(md.var_tau_pair(t, m, sp, ap, sb, o, a), cc);
                                    }
                                    lp.add_constraint(
                                        lbl("cutc", {t + 1, m + 1, sp + 1, ap + 1, s + 1, o + 1, a + 1}),
                                        std::move(row), Relation::Equal, 0.0);
                                }
                        }
            }
        }
    }
    return md;
}

FluidMeasures extract_fluid_measures(const FluidModel& model, const std::vector<double>& values) {
    const int M = model.num_components, T = model.horizon, A = model.num_actions;
    FluidMeasures fm;
    fm.horizon = T;
    fm.num_components = M;
    fm.num_actions = A;
    fm.states_of = model.states_of;
    fm.observations_of = model.observations_of;
    fm.has_pairs = model.with_cuts;
    fm.tau_s.resize(M);
    fm.tau_sa.resize(M);
    fm.tau_soa.resize(M);
    fm.tau_pair.resize(M);
    fm.tau_a.resize(static_cast<std::size_t>(T) * A);
    for (int t = 0; t < T; ++t)
        for (int a = 0; a < A; ++a) fm.tau_a[static_cast<std::size_t>(t) * A + a] = values[model.var_tau_a(t, a)];
    for (int m = 0; m < M; ++m) {
        const int S = model.states_of[m], O = model.observations_of[m];
        fm.tau_s[m].resize(static_cast<std::size_t>(T) * S);
        fm.tau_sa[m].resize(static_cast<std::size_t>(T) * S * A);
        fm.tau_soa[m].resize(static_cast<std::size_t>(T) * S * O * A);
        for (int t = 0; t < T; ++t)
            for (int s = 0; s < S; ++s) {
                fm.tau_s[m][static_cast<std::size_t>(t) * S + s] = values[model.var_tau_s(t, m, s)];
                for (int a = 0; a < A; ++a) {
                    fm.tau_sa[m][(static_cast<std::size_t>(t) * S + s) * A + a] =
                        values[model.var_tau_sa(t, m, s, a)];
                    for (int o = 0; o < O; ++o)
                        fm.tau_soa[m][((static_cast<std::size_t>(t) * S + s) * O + o) * A + a] =
                            values[model.var_tau_soa(t, m, s, o, a)];
                }
            }
        if (model.with_cuts) {
            fm.tau_pair[m].resize(static_cast<std::size_t>(T - 1) * S * A * S * O * A);
            std::size_t k = 0;
            for (int t = 1; t < T; ++t)
                for (int sp = 0; sp < S; ++sp)
                    for (int ap = 0; ap < A; ++ap)
                        for (int s = 0; s < S; ++s)
                            for (int o = 0; o < O; ++o)
                                for (int a = 0; a < A; ++a)
                                    fm.tau_pair[m][k++] = values[model.var_tau_pair(t, m, sp, ap, s, o, a)];
        }
    }
    return fm;
}

FluidSolveReport solve_fluid(const DecomposablePomdp& dec, bool with_cuts,
                             const std::optional<std::vector<int>>& initial_obs, long iteration_limit) {
    const auto t0 = std::chrono::steady_clock::now();
    FluidModel md = build_fluid_lp(dec, with_cuts, initial_obs);
    LpSolution sol = solve_lp(md.problem, iteration_limit);
    if (sol.status != LpStatus::Optimal)
        throw Error(std::string("fluid LP did not solve to optimality: ") + to_string(sol.status));
    FluidSolveReport rep;
    rep.objective = sol.objective;
    rep.measures = extract_fluid_measures(md, sol.primal);
    rep.with_cuts = with_cuts;
    rep.conditioned_observation = initial_obs;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.solution = std::move(sol);
    return rep;
}

std::optional<Policy> check_achievable(const DecomposablePomdp& dec, const FluidMeasures& fm,
                                       double tolerance) {
    const int M = fm.num_components, T = fm.horizon, A = fm.num_actions;
    long long joint_obs = 1;
    for (int m = 0; m < M; ++m) {
        joint_obs *= fm.observations_of[m];
        if (joint_obs > 10'000'000) throw ProductTooLarge("joint observation space exceeds 1e7");
    }
    (void)dec;

    // candidate[t][m][o]: action distribution or empty when no state cell
    // has positive mass.
    std::vector<std::vector<std::vector<std::vector<double>>>> cand(
        static_cast<std::size_t>(T), std::vector<std::vector<std::vector<double>>>(static_cast<std::size_t>(M)));
    for (int t = 0; t < T; ++t)
        for (int m = 0; m < M; ++m) {
            const int S = fm.states_of[m], O = fm.observations_of[m];
            cand[t][m].resize(static_cast<std::size_t>(O));
            for (int o = 0; o < O; ++o) {
                std::vector<double>& c = cand[t][m][o];
                for (int s = 0; s < S; ++s) {
                    double denom = 0.0;
                    for (int a = 0; a < A; ++a) denom += fm.soa_at(t, m, s, o, a);
                    if (denom <= tolerance) continue;  // unconstrained at measure-zero cells
                    std::vector<double> ratio(static_cast<std::size_t>(A));
                    for (int a = 0; a < A; ++a) ratio[a] = fm.soa_at(t, m, s, o, a) / denom;
                    if (c.empty()) {
                        c = std::move(ratio);
                    } else {
                        for (int a = 0; a < A; ++a)
                            if (std::fabs(ratio[a] - c[a]) > tolerance) return std::nullopt;
                    }
                }
            }
        }

    Policy pol;
    pol.horizon = T;
    pol.num_observations = static_cast<int>(joint_obs);
    pol.num_actions = A;
    pol.rules.assign(static_cast<std::size_t>(T) * joint_obs * A, 0.0);
    bool all_01 = true;
    std::vector<int> ov(static_cast<std::size_t>(M), 0);
    for (int t = 0; t < T; ++t) {
        std::fill(ov.begin(), ov.end(), 0);
        for (long long jo = 0; jo < joint_obs; ++jo) {
            const std::vector<double>* first = nullptr;
            for (int m = 0; m < M; ++m) {
                const std::vector<double>& c = cand[t][m][ov[m]];
                if (c.empty()) continue;
                if (!first) {
                    first = &c;
                } else {
                    for (int a = 0; a < A; ++a)
                        if (std::fabs(c[a] - (*first)[a]) > tolerance) return std::nullopt;
                }
            }
            double* row = pol.rules.data() + (static_cast<std::size_t>(t) * joint_obs + jo) * A;
            if (first) {
                for (int a = 0; a < A; ++a) {
                    row[a] = (*first)[a];
                    if (std::fabs(row[a]) > 1e-6 && std::fabs(row[a] - 1.0) > 1e-6) all_01 = false;
                }
            } else {
                row[0] = 1.0;  // never pinned by (10); any row works
            }
            // odometer over joint observations, component M least significant
            for (int m = M - 1; m >= 0; --m) {
                if (++ov[m] < fm.observations_of[m]) break;
                ov[m] = 0;
            }
        }
    }
    pol.deterministic = all_01;
    return pol;
}

int extract_first_action(const FluidMeasures& fm) {
    return static_cast<int>(kern::argmax(fm.tau_a.data(), static_cast<std::size_t>(fm.num_actions)));
}

std::string FluidModel::index_map_json() const {
    nlohmann::ordered_json j;
    for (int i = 0; i < problem.num_variables(); ++i) j[problem.variables[i].label] = i;
    return j.dump(1);
}

}  // namespace pomdp
