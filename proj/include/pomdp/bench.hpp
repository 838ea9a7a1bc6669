#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pomdp/model.hpp"

namespace pomdp {

// Experiment driver over a seeded instance family, mirroring the two
// experiment tables (exact programs with/without cuts; heuristics).
struct ExperimentSpec {
    struct Family {
        int states = 0;
        int observations = 0;
        int actions = 0;
        std::vector<int> horizons;
        std::vector<int> components;  // table 2 only; empty means {1}
    };
    Family family;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> programs;  // table 1: milp, milp+cuts; table 2: alg1, greedy
    double time_limit_seconds = 0.0;    // required, no default
    long scenarios = 100;               // K

    void validate() const;
    static ExperimentSpec from_json_file(const std::string& path);
};

struct Table1Row {
    int states = 0, observations = 0, actions = 0, horizon = 0;
    long policy_exponent = 0;
    std::uint64_t seed = 0;
    std::string program;
    bool solved = false;            // final gap within tolerance -> "Opt"
    double int_gap_percent = 0.0;
    double final_gap_percent = 0.0;
    double seconds = 0.0;
    std::string error;  // per-row isolation: nonempty when the solve failed
};

struct Table2Row {
    int components = 0, states = 0, observations = 0, actions = 0, horizon = 0;
    std::uint64_t seed = 0;
    std::string heuristic;
    double mean_step_seconds = 0.0;
    double average_gap_percent = 0.0;
    std::string error;
};

std::vector<Table1Row> run_table1(const ExperimentSpec& spec);
std::vector<Table2Row> run_table2(const ExperimentSpec& spec);

void write_table1_csv(const std::vector<Table1Row>& rows, std::ostream& os, bool zero_times = false);
void write_table2_csv(const std::vector<Table2Row>& rows, std::ostream& os, bool zero_times = false);

}  // namespace pomdp
