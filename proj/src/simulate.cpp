#include "pomdp/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "pomdp/fluid.hpp"
#include "pomdp/kernels.hpp"
#include "pomdp/rng.hpp"

namespace pomdp {

namespace {

// Scenario draw tags; every policy consumes the same draws at (seed, t).
enum DrawTag : std::uint64_t { kDrawInit = 0, kDrawObs = 1, kDrawTrans = 2 };

int sample_index(const double* probs, int n, double u) {
    double cum = 0.0;
    for (int i = 0; i < n; ++i) {
        cum += probs[i];
        if (u < cum) return i;
    }
    return n - 1;
}

std::vector<int> sample_initial_state(const DecomposablePomdp& dec, std::uint64_t seed) {
    std::vector<int> s(static_cast<std::size_t>(dec.num_components()));
    for (int m = 0; m < dec.num_components(); ++m)
        s[m] = sample_index(dec.components[m].initial.data(), dec.components[m].num_states,
                            CounterRng::u01_at(seed, 0, kDrawInit, static_cast<std::uint64_t>(m)));
    return s;
}

std::vector<int> sample_observation(const DecomposablePomdp& dec, const std::vector<int>& state, int t,
                                    std::uint64_t seed) {
    std::vector<int> o(static_cast<std::size_t>(dec.num_components()));
    for (int m = 0; m < dec.num_components(); ++m) {
        const PomdpInstance& c = dec.components[m];
        o[m] = sample_index(c.emission.data() + static_cast<std::size_t>(state[m]) * c.num_observations,
                            c.num_observations,
                            CounterRng::u01_at(seed, static_cast<std::uint64_t>(t), kDrawObs,
                                               static_cast<std::uint64_t>(m)));
    }
    return o;
}

Belief initial_belief(const DecomposablePomdp& dec) {
    Belief b;
    b.components.reserve(dec.components.size());
    for (const auto& c : dec.components) b.components.push_back(c.initial);
    return b;
}

// Shared trajectory loop; `decide` picks the action from the pre-action
// belief and the sampled observation.
template <typename Decide>
Scenario run_scenario(const DecomposablePomdp& dec, std::uint64_t seed, Decide decide) {
    const int M = dec.num_components(), T = dec.horizon;
    Scenario sc;
    sc.seed = seed;
    sc.log.reserve(static_cast<std::size_t>(T));
    std::vector<int> state = sample_initial_state(dec, seed);
    Belief belief = initial_belief(dec);
    for (int t = 1; t <= T; ++t) {
        StepRecord rec;
        rec.state = state;
        rec.obs = sample_observation(dec, state, t, seed);
        const auto t0 = std::chrono::steady_clock::now();
        rec.action = decide(belief, rec.obs, t);
        rec.decision_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        double reward = 0.0;
        std::vector<int> next(static_cast<std::size_t>(M));
        for (int m = 0; m < M; ++m) {
            const PomdpInstance& c = dec.components[m];
            next[m] = sample_index(c.trans_row(state[m], rec.action), c.num_states,
                                   CounterRng::u01_at(seed, static_cast<std::uint64_t>(t), kDrawTrans,
                                                      static_cast<std::uint64_t>(m)));
            reward += c.rew(state[m], rec.action, next[m]);
        }
        rec.reward = reward;
        bool flagged = false;
        belief = belief_update(belief, rec.obs, rec.action, dec, &flagged);
        if (flagged) sc.impossible_observation = true;
        sc.log.push_back(std::move(rec));
        state = std::move(next);
    }
    sc.final_state = state;
    return sc;
}

}  // namespace

const char* to_string(HeuristicKind h) { return h == HeuristicKind::Alg1 ? "alg1" : "greedy"; }

double Scenario::total_reward() const {
    double r = 0.0;
    for (const auto& rec : log) r += rec.reward;
    return r;
}

double Scenario::mean_decision_seconds() const {
    if (log.empty()) return 0.0;
    double s = 0.0;
    for (const auto& rec : log) s += rec.decision_seconds;
    return s / static_cast<double>(log.size());
}

Belief belief_update(const Belief& belief, const std::vector<int>& obs, int action,
                     const DecomposablePomdp& dec, bool* flagged) {
    const int M = dec.num_components();
    if (static_cast<int>(belief.components.size()) != M || static_cast<int>(obs.size()) != M)
        throw DimensionMismatch("belief/observation arity mismatch");
    Belief out;
    out.components.resize(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        const PomdpInstance& c = dec.components[m];
        const int S = c.num_states;
        std::vector<double> filt(static_cast<std::size_t>(S));
        for (int s = 0; s < S; ++s) filt[s] = c.emit(s, obs[m]) * belief.components[m][s];
        double z = kern::sum(filt.data(), filt.size());
        if (z > 0.0) {
            kern::scale(filt.data(), 1.0 / z, filt.size());
        } else {
            filt = belief.components[m];  // impossible observation: predict from the prior
            if (flagged) *flagged = true;
        }
        std::vector<double> pred(static_cast<std::size_t>(S), 0.0);
        for (int s = 0; s < S; ++s)
            if (filt[s] != 0.0) kern::axpy(pred.data(), filt[s], c.trans_row(s, action), static_cast<std::size_t>(S));
        double zp = kern::sum(pred.data(), pred.size());
        kern::scale(pred.data(), 1.0 / zp, pred.size());  // exact simplex membership
        out.components[m] = std::move(pred);
    }
    return out;
}

namespace {

// Remaining-horizon decomposable model with the beliefs as initials.
DecomposablePomdp rolled_model(const DecomposablePomdp& dec, const Belief& belief, int horizon) {
    DecomposablePomdp d = dec;
    d.horizon = horizon;
    for (int m = 0; m < d.num_components(); ++m) {
        d.components[m].initial = belief.components[m];
        d.components[m].horizon = horizon;
    }
    return d;
}

// Conditioning on the step's observation covers all probabilities: the
// initial distribution becomes the filtered posterior and the t=1 emission
// rows become indicators. Falls back to the unfiltered belief on
// zero-probability observations, like belief_update.
Belief filtered_belief(const DecomposablePomdp& dec, const Belief& belief, const std::vector<int>& obs) {
    Belief out;
    out.components.resize(belief.components.size());
    for (int m = 0; m < dec.num_components(); ++m) {
        const PomdpInstance& c = dec.components[m];
        const int S = c.num_states;
        std::vector<double> filt(static_cast<std::size_t>(S));
        for (int s = 0; s < S; ++s) filt[s] = c.emit(s, obs[m]) * belief.components[m][s];
        double z = kern::sum(filt.data(), filt.size());
        if (z > 0.0) kern::scale(filt.data(), 1.0 / z, filt.size());
        else filt = belief.components[m];
        out.components[m] = std::move(filt);
    }
    return out;
}

}  // namespace

Scenario run_heuristic_policy(const DecomposablePomdp& dec, std::uint64_t scenario_seed,
                              const SolveOptions& options) {
    return run_scenario(dec, scenario_seed, [&](const Belief& belief, const std::vector<int>& obs, int t) {
        int remaining = dec.horizon - t + 1;
        if (options.fixed_window > 0) remaining = std::min(options.fixed_window, remaining);
        DecomposablePomdp rolled = rolled_model(dec, filtered_belief(dec, belief, obs), remaining);
        FluidSolveReport rep =
            solve_fluid(rolled, options.cuts_in_heuristic, obs, options.lp_iteration_limit);
        return extract_first_action(rep.measures);
    });
}

Scenario run_greedy_policy(const DecomposablePomdp& dec, std::uint64_t scenario_seed) {
    const int M = dec.num_components(), A = dec.num_actions;
    return run_scenario(dec, scenario_seed, [&](const Belief& belief, const std::vector<int>& obs, int) {
        std::vector<double> score(static_cast<std::size_t>(A), 0.0);
        for (int m = 0; m < M; ++m) {
            const PomdpInstance& c = dec.components[m];
            const int S = c.num_states;
            std::vector<double> filt(static_cast<std::size_t>(S));
            for (int s = 0; s < S; ++s) filt[s] = c.emit(s, obs[m]) * belief.components[m][s];
            double z = kern::sum(filt.data(), filt.size());
            const double* base = (z > 0.0) ? filt.data() : belief.components[m].data();
            int shat = static_cast<int>(kern::argmax(base, static_cast<std::size_t>(S)));
            for (int a = 0; a < A; ++a) score[a] += c.expected_reward(shat, a);
        }
        return static_cast<int>(kern::argmax(score.data(), score.size()));
    });
}

SimulationReport monte_carlo(const DecomposablePomdp& dec, HeuristicKind kind, long num_scenarios,
                             std::uint64_t master_seed, const SolveOptions& options) {
    if (num_scenarios < 1) throw DimensionMismatch("number of scenarios must be >= 1");
    SimulationReport rep;
    rep.heuristic = to_string(kind);
    rep.rows.resize(static_cast<std::size_t>(num_scenarios));

    auto run_one = [&](long k) {
        const std::uint64_t seed = CounterRng::derive(master_seed, static_cast<std::uint64_t>(k));
        ScenarioRow row;
        row.k = k;
        row.seed = seed;
        // Upper bound: fluid LP with cuts conditioned on the scenario's
        // first observation (same draws the heuristic will see).
        std::vector<int> s1 = sample_initial_state(dec, seed);
        std::vector<int> o1 = sample_observation(dec, s1, 1, seed);
        if (options.condition_bound_on_obs) {
            Belief prior = initial_belief(dec);
            DecomposablePomdp cond = rolled_model(dec, filtered_belief(dec, prior, o1), dec.horizon);
            row.z_mk = solve_fluid(cond, true, o1, options.lp_iteration_limit).objective;
        } else {
            row.z_mk = solve_fluid(dec, true, std::nullopt, options.lp_iteration_limit).objective;
        }
        Scenario sc = (kind == HeuristicKind::Alg1) ? run_heuristic_policy(dec, seed, options)
                                                    : run_greedy_policy(dec, seed);
        row.reward = sc.total_reward();
        row.mean_step_seconds = sc.mean_decision_seconds();
        if (row.z_mk > 0.0) {
            row.gap_percent = 100.0 * (row.z_mk - row.reward) / row.z_mk;
        } else {
            row.gap_defined = false;  // NonPositiveBound: excluded from the average
        }
        rep.rows[static_cast<std::size_t>(k)] = std::move(row);
    };

    const int threads = std::max(1, options.threads);
    if (threads == 1) {
        for (long k = 0; k < num_scenarios; ++k) run_one(k);
    } else {
        std::vector<std::thread> pool;
        std::atomic<long> next{0};
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (long k = next.fetch_add(1); k < num_scenarios; k = next.fetch_add(1)) run_one(k);
            });
        for (auto& th : pool) th.join();
    }

    // Fixed reduction order by scenario index keeps aggregates bit-stable
    // for any thread count.
    double gap_sum = 0.0, step_sum = 0.0;
    long included = 0;
    for (const auto& row : rep.rows) {
        step_sum += row.mean_step_seconds;
        if (row.gap_defined) {
            gap_sum += row.gap_percent;
            ++included;
        } else {
            ++rep.excluded_nonpositive;
        }
    }
    rep.average_gap_percent = included > 0 ? gap_sum / static_cast<double>(included) : 0.0;
    rep.mean_step_seconds = step_sum / static_cast<double>(num_scenarios);
    return rep;
}

void SimulationReport::write_csv(std::ostream& os, bool zero_times) const {
    os << "k,seed,z_mk,reward,gap_pct,mean_step_seconds\n";
    char buf[256];
    for (const auto& r : rows) {
        double secs = zero_times ? 0.0 : r.mean_step_seconds;
        if (r.gap_defined)
            std::snprintf(buf, sizeof buf, "%ld,%llu,%.12g,%.12g,%.12g,%.6f\n", r.k,
                          static_cast<unsigned long long>(r.seed), r.z_mk, r.reward, r.gap_percent, secs);
        else
            std::snprintf(buf, sizeof buf, "%ld,%llu,%.12g,%.12g,excluded,%.6f\n", r.k,
                          static_cast<unsigned long long>(r.seed), r.z_mk, r.reward, secs);
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "summary,%s,,,%.12g,%.6f\n", heuristic.c_str(), average_gap_percent,
                  zero_times ? 0.0 : mean_step_seconds);
    os << buf;
}

}  // namespace pomdp
