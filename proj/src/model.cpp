#include "pomdp/model.hpp"

#include <cmath>
#include <sstream>

#include "pomdp/kernels.hpp"
#include "pomdp/rng.hpp"

namespace pomdp {

namespace {

void check_positive(int v, const char* what) {
    if (v < 1) {
        std::ostringstream os;
        os << what << " must be >= 1, got " << v;
        throw DimensionMismatch(os.str());
    }
}

void check_size(std::size_t got, std::size_t want, const char* tensor) {
    if (got != want) {
        std::ostringstream os;
        os << tensor << " has " << got << " entries, expected " << want;
        throw DimensionMismatch(os.str());
    }
}

// One probability row: entries >= 0, sum within kStochasticTol of 1.
void check_row(const double* row, int n, const char* tensor, const std::string& index) {
    for (int i = 0; i < n; ++i) {
        if (!(row[i] >= 0.0)) {
            std::ostringstream os;
            os << tensor << index << " entry " << i << " is negative (" << row[i] << ")";
            throw NegativeProbability(os.str());
        }
    }
    double s = kern::sum(row, static_cast<std::size_t>(n));
    if (std::fabs(s - 1.0) > kStochasticTol) {
        std::ostringstream os;
        os << tensor << index << " sums to " << s << ", expected 1 within " << kStochasticTol;
        throw NonStochasticRow(os.str());
    }
}

std::string idx1(int a) {
    std::ostringstream os;
    os << "[" << a << "]";
    return os.str();
}

std::string idx2(int a, int b) {
    std::ostringstream os;
    os << "[" << a << "][" << b << "]";
    return os.str();
}

}  // namespace

double PomdpInstance::expected_reward(int s, int a) const {
    return kern::dot(trans_row(s, a), rew_row(s, a), static_cast<std::size_t>(num_states));
}

int Policy::action_at(int t, int o) const {
    const double* row = rules.data() + (static_cast<std::size_t>(t) * num_observations + o) * num_actions;
    return static_cast<int>(kern::argmax(row, static_cast<std::size_t>(num_actions)));
}

PomdpInstance validate_instance(PomdpInstance raw) {
    check_positive(raw.num_states, "num_states");
    check_positive(raw.num_observations, "num_observations");
    check_positive(raw.num_actions, "num_actions");
    check_positive(raw.horizon, "horizon");
    const std::size_t S = raw.num_states, O = raw.num_observations, A = raw.num_actions;
    check_size(raw.initial.size(), S, "initial");
    check_size(raw.transition.size(), S * A * S, "transition");
    check_size(raw.emission.size(), S * O, "emission");
    check_size(raw.reward.size(), S * A * S, "reward");

    check_row(raw.initial.data(), raw.num_states, "initial", "");
    for (int s = 0; s < raw.num_states; ++s)
        for (int a = 0; a < raw.num_actions; ++a)
            check_row(raw.trans_row(s, a), raw.num_states, "transition", idx2(s, a));
    for (int s = 0; s < raw.num_states; ++s)
        check_row(raw.emission.data() + static_cast<std::size_t>(s) * O, raw.num_observations,
                  "emission", idx1(s));
    for (std::size_t i = 0; i < raw.reward.size(); ++i) {
        if (!std::isfinite(raw.reward[i])) {
            std::ostringstream os;
            os << "reward entry " << i << " is not finite";
            throw NonFiniteReward(os.str());
        }
    }
    return raw;
}

DecomposablePomdp validate_decomposable(DecomposablePomdp raw) {
    check_positive(raw.num_actions, "num_actions");
    check_positive(raw.horizon, "horizon");
    if (raw.components.empty()) throw DimensionMismatch("decomposable POMDP needs at least one component");
    for (std::size_t m = 0; m < raw.components.size(); ++m) {
        const PomdpInstance& c = raw.components[m];
        if (c.num_actions != raw.num_actions) {
            std::ostringstream os;
            os << "component " << m + 1 << " has " << c.num_actions << " actions, shared space has "
               << raw.num_actions;
            throw DimensionMismatch(os.str());
        }
        if (c.horizon != raw.horizon) {
            std::ostringstream os;
            os << "component " << m + 1 << " horizon " << c.horizon << " != shared horizon " << raw.horizon;
            throw DimensionMismatch(os.str());
        }
        raw.components[m] = validate_instance(std::move(raw.components[m]));
    }
    return raw;
}

Policy validate_policy(Policy raw) {
    check_positive(raw.horizon, "horizon");
    check_positive(raw.num_observations, "num_observations");
    check_positive(raw.num_actions, "num_actions");
    const std::size_t want = static_cast<std::size_t>(raw.horizon) * raw.num_observations * raw.num_actions;
    check_size(raw.rules.size(), want, "rules");
    for (int t = 0; t < raw.horizon; ++t)
        for (int o = 0; o < raw.num_observations; ++o) {
            const double* row =
                raw.rules.data() + (static_cast<std::size_t>(t) * raw.num_observations + o) * raw.num_actions;
            check_row(row, raw.num_actions, "policy", idx2(t + 1, o + 1));
            if (raw.deterministic) {
                for (int a = 0; a < raw.num_actions; ++a) {
                    double v = row[a];
                    if (std::fabs(v - std::round(v)) > 1e-6) {
                        std::ostringstream os;
                        os << "policy" << idx2(t + 1, o + 1) << " entry " << a
                           << " = " << v << " is not 0/1 but policy is flagged deterministic";
                        throw NonStochasticRow(os.str());
                    }
                }
            }
        }
    return raw;
}

void validate_belief(const Belief& b, const DecomposablePomdp& dec) {
    if (static_cast<int>(b.components.size()) != dec.num_components())
        throw DimensionMismatch("belief component count mismatch");
    for (std::size_t m = 0; m < b.components.size(); ++m) {
        check_size(b.components[m].size(), dec.components[m].num_states, "belief");
        check_row(b.components[m].data(), dec.components[m].num_states, "belief", idx1(static_cast<int>(m) + 1));
    }
}

int joint_index(const std::vector<int>& per_component, const std::vector<int>& sizes) {
    int idx = 0;
    for (std::size_t m = 0; m < sizes.size(); ++m) idx = idx * sizes[m] + per_component[m];
    return idx;
}

std::vector<int> split_joint_index(int joint, const std::vector<int>& sizes) {
    std::vector<int> out(sizes.size());
    for (std::size_t m = sizes.size(); m-- > 0;) {
        out[m] = joint % sizes[m];
        joint /= sizes[m];
    }
    return out;
}

PomdpInstance compose(const DecomposablePomdp& dec) {
    const int M = dec.num_components();
    std::vector<int> sdim(M), odim(M);
    long long S = 1, O = 1;
    for (int m = 0; m < M; ++m) {
        sdim[m] = dec.components[m].num_states;
        odim[m] = dec.components[m].num_observations;
        S *= sdim[m];
        O *= odim[m];
        if (S > 100'000'000 || O > 100'000'000) throw ProductTooLarge("joint space overflow");
    }
    const long long A = dec.num_actions;
    auto guard = [](long long cells, const char* tensor) {
        if (cells > 10'000'000) {
            std::ostringstream os;
            os << "composed " << tensor << " would need " << cells << " cells (limit 1e7)";
            throw ProductTooLarge(os.str());
        }
    };
    guard(S, "initial");
    guard(S * A * S, "transition");
    guard(S * O, "emission");

    PomdpInstance out;
    out.num_states = static_cast<int>(S);
    out.num_observations = static_cast<int>(O);
    out.num_actions = dec.num_actions;
    out.horizon = dec.horizon;
    out.initial.assign(static_cast<std::size_t>(S), 1.0);
    out.transition.assign(static_cast<std::size_t>(S * A * S), 1.0);
    out.emission.assign(static_cast<std::size_t>(S * O), 1.0);
    out.reward.assign(static_cast<std::size_t>(S * A * S), 0.0);

    std::vector<int> sp(M), spp(M), op(M);
    for (int s = 0; s < S; ++s) {
        auto sv = split_joint_index(s, sdim);
        double p0 = 1.0;
        for (int m = 0; m < M; ++m) p0 *= dec.components[m].initial[sv[m]];
        out.initial[s] = p0;
        for (int o = 0; o < O; ++o) {
            auto ov = split_joint_index(o, odim);
            double pe = 1.0;
            for (int m = 0; m < M; ++m) pe *= dec.components[m].emit(sv[m], ov[m]);
            out.emission[static_cast<std::size_t>(s) * O + o] = pe;
        }
        for (int a = 0; a < A; ++a)
            for (int s2 = 0; s2 < S; ++s2) {
                auto s2v = split_joint_index(s2, sdim);
                double pt = 1.0, r = 0.0;
                for (int m = 0; m < M; ++m) {
                    pt *= dec.components[m].trans(sv[m], a, s2v[m]);
                    r += dec.components[m].rew(sv[m], a, s2v[m]);
                }
                const std::size_t at = (static_cast<std::size_t>(s) * A + a) * S + s2;
                out.transition[at] = pt;
                out.reward[at] = r;
            }
    }
    return validate_instance(std::move(out));
}

namespace {

// Fill a probability row: i.i.d. uniform(0,1) then exact renormalization.
void random_row(CounterRng& rng, double* row, int n) {
    for (int i = 0; i < n; ++i) row[i] = rng.next_u01();
    double s = kern::sum(row, static_cast<std::size_t>(n));
    kern::scale(row, 1.0 / s, static_cast<std::size_t>(n));
}

}  // namespace

PomdpInstance generate_random_instance(std::uint64_t seed, const Dims& dims) {
    check_positive(dims.states, "states");
    check_positive(dims.observations, "observations");
    check_positive(dims.actions, "actions");
    check_positive(dims.horizon, "horizon");

    PomdpInstance inst;
    inst.num_states = dims.states;
    inst.num_observations = dims.observations;
    inst.num_actions = dims.actions;
    inst.horizon = dims.horizon;
    const std::size_t S = dims.states, O = dims.observations, A = dims.actions;
    inst.initial.resize(S);
    inst.transition.resize(S * A * S);
    inst.emission.resize(S * O);
    inst.reward.resize(S * A * S);

    CounterRng rng(seed);
    random_row(rng, inst.initial.data(), dims.states);
    for (int s = 0; s < dims.states; ++s)
        for (int a = 0; a < dims.actions; ++a)
            random_row(rng, inst.transition.data() + (static_cast<std::size_t>(s) * A + a) * S, dims.states);
    for (int s = 0; s < dims.states; ++s)
        random_row(rng, inst.emission.data() + static_cast<std::size_t>(s) * O, dims.observations);
    for (std::size_t i = 0; i < inst.reward.size(); ++i) inst.reward[i] = rng.next_u01();

    return validate_instance(std::move(inst));
}

DecomposablePomdp generate_random_decomposable(std::uint64_t seed, int num_components, const Dims& dims) {
    check_positive(num_components, "num_components");
    DecomposablePomdp dec;
    dec.num_actions = dims.actions;
    dec.horizon = dims.horizon;
    dec.components.reserve(static_cast<std::size_t>(num_components));
    for (int m = 0; m < num_components; ++m)
        dec.components.push_back(generate_random_instance(CounterRng::derive(seed, static_cast<std::uint64_t>(m)), dims));
    return dec;
}

PolicyCount count_deterministic_policies(int num_obs, int num_actions, int horizon) {
    check_positive(num_obs, "num_obs");
    check_positive(num_actions, "num_actions");
    check_positive(horizon, "horizon");
    PolicyCount pc;
    pc.count = boost::multiprecision::pow(boost::multiprecision::cpp_int(num_actions),
                                          static_cast<unsigned>(num_obs) * static_cast<unsigned>(horizon));
    pc.exponent = static_cast<long>(pc.count.str().size()) - 1;
    return pc;
}

std::vector<double> conditional_state_given_obs(const PomdpInstance& inst, int s_prev, int a_prev, int o) {
    std::vector<double> post(static_cast<std::size_t>(inst.num_states));
    for (int s = 0; s < inst.num_states; ++s) post[s] = inst.emit(s, o) * inst.trans(s_prev, a_prev, s);
    double z = kern::sum(post.data(), post.size());
    if (z > 0.0) kern::scale(post.data(), 1.0 / z, post.size());
    else post.assign(post.size(), 0.0);
    return post;
}

}  // namespace pomdp
