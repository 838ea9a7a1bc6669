#include "pomdp/bench.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "pomdp/milp.hpp"
#include "pomdp/pomdp_milp.hpp"
#include "pomdp/simulate.hpp"

namespace pomdp {

void ExperimentSpec::validate() const {
    if (family.states < 1 || family.observations < 1 || family.actions < 1)
        throw DimensionMismatch("experiment family dimensions must be >= 1");
    if (family.horizons.empty()) throw DimensionMismatch("experiment needs at least one horizon");
    if (seeds.empty()) throw DimensionMismatch("experiment needs at least one seed");
    if (programs.empty()) throw DimensionMismatch("experiment needs at least one program");
    if (!(time_limit_seconds > 0.0)) throw DimensionMismatch("time limit must be positive");
    if (scenarios < 1) throw DimensionMismatch("K must be >= 1");
}

ExperimentSpec ExperimentSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
    ExperimentSpec spec;
    const auto& f = j.at("family");
    spec.family.states = f.at("states").get<int>();
    spec.family.observations = f.at("observations").get<int>();
    spec.family.actions = f.at("actions").get<int>();
    spec.family.horizons = f.at("horizons").get<std::vector<int>>();
    if (f.contains("components")) spec.family.components = f.at("components").get<std::vector<int>>();
    spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    spec.programs = j.at("programs").get<std::vector<std::string>>();
    spec.time_limit_seconds = j.at("time_limit_seconds").get<double>();
    if (j.contains("scenarios")) spec.scenarios = j.at("scenarios").get<long>();
    spec.validate();
    return spec;
}

std::vector<Table1Row> run_table1(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<Table1Row> rows;
    for (int T : spec.family.horizons)
        for (std::uint64_t seed : spec.seeds) {
            Dims dims{spec.family.states, spec.family.observations, spec.family.actions, T};
            PolicyCount pc =
                count_deterministic_policies(spec.family.observations, spec.family.actions, T);
            for (const std::string& program : spec.programs) {
                Table1Row row;
                row.states = dims.states;
                row.observations = dims.observations;
                row.actions = dims.actions;
                row.horizon = T;
                row.policy_exponent = pc.exponent;
                row.seed = seed;
                row.program = program;
                try {
                    bool cuts;
                    if (program == "milp") cuts = false;
                    else if (program == "milp+cuts") cuts = true;
                    else throw Error("unknown table-1 program " + program);
                    PomdpInstance inst = generate_random_instance(seed, dims);
                    PomdpMilpModel model = build_pomdp_milp(inst, cuts);
                    MilpOptions mo;
                    mo.time_limit_seconds = spec.time_limit_seconds;
                    MilpResult res = solve_milp(model.problem, mo);
                    row.solved = res.status == MilpStatus::Optimal;
                    row.int_gap_percent = res.integrality_gap_percent;
                    row.final_gap_percent = res.final_gap_percent;
                    row.seconds = res.wall_seconds;
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
                rows.push_back(std::move(row));
            }
        }
    return rows;
}

std::vector<Table2Row> run_table2(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<int> comps = spec.family.components.empty() ? std::vector<int>{1} : spec.family.components;
    std::vector<Table2Row> rows;
    for (int M : comps)
        for (int T : spec.family.horizons)
            for (std::uint64_t seed : spec.seeds) {
                Dims dims{spec.family.states, spec.family.observations, spec.family.actions, T};
                for (const std::string& program : spec.programs) {
                    Table2Row row;
                    row.components = M;
                    row.states = dims.states;
                    row.observations = dims.observations;
                    row.actions = dims.actions;
                    row.horizon = T;
                    row.seed = seed;
                    row.heuristic = program;
                    try {
                        HeuristicKind kind;
                        if (program == "alg1") kind = HeuristicKind::Alg1;
                        else if (program == "greedy") kind = HeuristicKind::Greedy;
                        else throw Error("unknown table-2 program " + program);
                        DecomposablePomdp dec = generate_random_decomposable(seed, M, dims);
                        SimulationReport rep = monte_carlo(dec, kind, spec.scenarios, seed);
                        row.mean_step_seconds = rep.mean_step_seconds;
                        row.average_gap_percent = rep.average_gap_percent;
                    } catch (const std::exception& e) {
                        row.error = e.what();
                    }
                    rows.push_back(std::move(row));
                }
            }
    return rows;
}

void write_table1_csv(const std::vector<Table1Row>& rows, std::ostream& os, bool zero_times) {
    os << "states,obs,actions,horizon,policies_exp,seed,program,int_gap_pct,final_gap_pct,time_s,error\n";
    char buf[512];
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            os << r.states << "," << r.observations << "," << r.actions << "," << r.horizon << ","
               << r.policy_exponent << "," << r.seed << "," << r.program << ",,,," << r.error << "\n";
            continue;
        }
        char final_gap[64];
        if (r.solved) std::snprintf(final_gap, sizeof final_gap, "Opt");
        else std::snprintf(final_gap, sizeof final_gap, "%.12g", r.final_gap_percent);
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%ld,%llu,%s,%.12g,%s,%.3f,\n", r.states, r.observations,
                      r.actions, r.horizon, r.policy_exponent, static_cast<unsigned long long>(r.seed),
                      r.program.c_str(), r.int_gap_percent, final_gap, zero_times ? 0.0 : r.seconds);
        os << buf;
    }
}

void write_table2_csv(const std::vector<Table2Row>& rows, std::ostream& os, bool zero_times) {
    os << "components,states,obs,actions,horizon,seed,heuristic,mean_step_seconds,avg_gap_pct,error\n";
    char buf[512];
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            os << r.components << "," << r.states << "," << r.observations << "," << r.actions << ","
               << r.horizon << "," << r.seed << "," << r.heuristic << ",,," << r.error << "\n";
            continue;
        }
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%d,%d,%llu,%s,%.6f,%.12g,\n", r.components, r.states,
                      r.observations, r.actions, r.horizon, static_cast<unsigned long long>(r.seed),
                      r.heuristic.c_str(), zero_times ? 0.0 : r.mean_step_seconds, r.average_gap_percent);
        os << buf;
    }
}

}  // namespace pomdp
