// Command-line front end: generate / solve / simulate / exact / bench.
// Exit codes: 0 ok, 1 I/O failure, 2 usage, 3 infeasible, 4 search-space guard.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include <CLI11.hpp>

#include "pomdp/bench.hpp"
#include "pomdp/fluid.hpp"
#include "pomdp/milp.hpp"
#include "pomdp/model.hpp"
#include "pomdp/model_io.hpp"
#include "pomdp/oracle.hpp"
#include "pomdp/pomdp_milp.hpp"
#include "pomdp/simulate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitGuard = 4;

struct GlobalFlags {
    bool quiet = false;
    bool no_timing = false;
    int threads = 1;
};

void say(const GlobalFlags& g, const std::string& line) {
    if (!g.quiet) std::cout << line << "\n";
}

std::vector<int> parse_obs_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        int v = std::stoi(item);
        if (v < 1) throw pomdp::DimensionMismatch("observation indices are 1-based");
        out.push_back(v - 1);
    }
    return out;
}

const char* backend_name() {
    const char* env = std::getenv("POMDP_LP_BACKEND");
    if (env == nullptr || std::string(env) == "builtin") return "builtin";
    throw pomdp::Error(std::string("LP backend '") + env + "' is not compiled in (builtin only)");
}

int cmd_generate(const GlobalFlags& g, int states, int obs, int actions, int horizon, int components,
                 std::uint64_t seed, const std::string& out) {
    pomdp::Dims dims{states, obs, actions, horizon};
    std::string payload;
    long long joint_obs = 1;
    if (components > 1) {
        pomdp::DecomposablePomdp dec = pomdp::generate_random_decomposable(seed, components, dims);
        payload = pomdp::instance_to_json(dec);
        for (const auto& c : dec.components) joint_obs *= c.num_observations;
    } else {
        pomdp::PomdpInstance inst = pomdp::generate_random_instance(seed, dims);
        payload = pomdp::instance_to_json(inst);
        joint_obs = obs;
    }
    pomdp::write_file_atomic(out, payload);
    pomdp::PolicyCount pc =
        pomdp::count_deterministic_policies(static_cast<int>(joint_obs), actions, horizon);
    say(g, "wrote " + out);
    say(g, "policies ≈ 10^" + std::to_string(pc.exponent));
    return kExitOk;
}

int cmd_solve(const GlobalFlags& g, const std::string& in, const std::string& mode, bool cuts,
              const std::string& initial_obs_csv, double time_limit, const std::string& out_csv) {
    pomdp::LoadedInstance loaded = pomdp::load_instance_file(in);
    const bool is_dec = std::holds_alternative<pomdp::DecomposablePomdp>(loaded);

    std::ostringstream csv;
    csv << "mode,cuts,status,objective,bound,int_gap_pct,final_gap_pct,nodes,time_s\n";
    int rc = kExitOk;
    if (mode == "fluid") {
        if (!is_dec) {
            std::cerr << "mode/kind mismatch: fluid requires a decomposable instance file\n";
            return kExitUsage;
        }
        const auto& dec = std::get<pomdp::DecomposablePomdp>(loaded);
        std::optional<std::vector<int>> cond;
        if (!initial_obs_csv.empty()) cond = parse_obs_list(initial_obs_csv);
        pomdp::FluidSolveReport rep = pomdp::solve_fluid(dec, cuts, cond);
        char line[256];
        std::snprintf(line, sizeof line, "fluid objective z_M = %.9f  (cuts=%d, time %.3fs)", rep.objective,
                      cuts ? 1 : 0, g.no_timing ? 0.0 : rep.wall_seconds);
        say(g, line);
        std::snprintf(line, sizeof line, "fluid,%d,Optimal,%.12g,%.12g,,,0,%.3f\n", cuts ? 1 : 0,
                      rep.objective, rep.objective, g.no_timing ? 0.0 : rep.wall_seconds);
        csv << line;
    } else if (mode == "milp" || mode == "relax") {
        pomdp::PomdpInstance inst = is_dec ? pomdp::compose(std::get<pomdp::DecomposablePomdp>(loaded))
                                           : std::get<pomdp::PomdpInstance>(loaded);
        pomdp::PomdpMilpModel model = pomdp::build_pomdp_milp(inst, cuts);
        if (mode == "relax") {
            const auto t0 = std::chrono::steady_clock::now();
            pomdp::LpSolution sol = pomdp::root_relaxation(model.problem);
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (sol.status == pomdp::LpStatus::Infeasible) {
                std::cerr << "relaxation infeasible (data bug?)\n";
                return kExitInfeasible;
            }
            char line[256];
            std::snprintf(line, sizeof line, "relaxation z_LR = %.9f  (cuts=%d, status %s, time %.3fs)",
                          sol.objective, cuts ? 1 : 0, pomdp::to_string(sol.status),
                          g.no_timing ? 0.0 : secs);
            say(g, line);
            std::snprintf(line, sizeof line, "relax,%d,%s,%.12g,%.12g,,,0,%.3f\n", cuts ? 1 : 0,
                          pomdp::to_string(sol.status), sol.objective, sol.objective,
                          g.no_timing ? 0.0 : secs);
            csv << line;
        } else {
            pomdp::MilpOptions mo;
            mo.time_limit_seconds = time_limit;
            pomdp::MilpResult res = pomdp::solve_milp(model.problem, mo);
            if (res.status == pomdp::MilpStatus::Infeasible) {
                std::cerr << "MILP infeasible (data bug?)\n";
                return kExitInfeasible;
            }
            char line[320];
            std::snprintf(line, sizeof line,
                          "milp z = %.9f  bound = %.9f  int_gap = %.4f%%  final_gap = %s  nodes = %ld  "
                          "time %.3fs",
                          res.incumbent, res.best_bound, res.integrality_gap_percent,
                          res.status == pomdp::MilpStatus::Optimal
                              ? "Opt"
                              : (std::to_string(res.final_gap_percent) + "%").c_str(),
                          res.nodes_processed, g.no_timing ? 0.0 : res.wall_seconds);
            say(g, line);
            std::snprintf(line, sizeof line, "milp,%d,%s,%.12g,%.12g,%.12g,%.12g,%ld,%.3f\n", cuts ? 1 : 0,
                          pomdp::to_string(res.status), res.incumbent, res.best_bound,
                          res.integrality_gap_percent, res.final_gap_percent, res.nodes_processed,
                          g.no_timing ? 0.0 : res.wall_seconds);
            csv << line;
            if (res.status == pomdp::MilpStatus::TimeLimit && !res.has_incumbent()) rc = kExitInfeasible;
        }
    } else {
        std::cerr << "unknown mode " << mode << "\n";
        return kExitUsage;
    }
    if (!out_csv.empty()) pomdp::write_file_atomic(out_csv, csv.str());
    return rc;
}

int cmd_simulate(const GlobalFlags& g, const std::string& in, const std::string& heuristic, long scenarios,
                 std::uint64_t seed, int fixed_window, const std::string& out_csv) {
    pomdp::LoadedInstance loaded = pomdp::load_instance_file(in);
    if (!std::holds_alternative<pomdp::DecomposablePomdp>(loaded)) {
        std::cerr << "simulate requires a decomposable instance file\n";
        return kExitUsage;
    }
    pomdp::HeuristicKind kind;
    if (heuristic == "alg1") kind = pomdp::HeuristicKind::Alg1;
    else if (heuristic == "greedy") kind = pomdp::HeuristicKind::Greedy;
    else {
        std::cerr << "unknown heuristic " << heuristic << "\n";
        return kExitUsage;
    }
    pomdp::SolveOptions opts;
    opts.fixed_window = fixed_window;
    opts.threads = g.threads;
    pomdp::SimulationReport rep =
        pomdp::monte_carlo(std::get<pomdp::DecomposablePomdp>(loaded), kind, scenarios, seed, opts);
    std::ostringstream csv;
    rep.write_csv(csv, g.no_timing);
    if (!out_csv.empty()) pomdp::write_file_atomic(out_csv, csv.str());
    else std::cout << csv.str();
    char line[256];
    std::snprintf(line, sizeof line, "%s: average gap %.4f%% over %ld scenarios (%ld excluded), %.4fs/step",
                  rep.heuristic.c_str(), rep.average_gap_percent, scenarios, rep.excluded_nonpositive,
                  g.no_timing ? 0.0 : rep.mean_step_seconds);
    say(g, line);
    return kExitOk;
}

int cmd_exact(const GlobalFlags& g, const std::string& in, const std::string& mode) {
    pomdp::LoadedInstance loaded = pomdp::load_instance_file(in);
    pomdp::PomdpInstance inst = std::holds_alternative<pomdp::DecomposablePomdp>(loaded)
                                    ? pomdp::compose(std::get<pomdp::DecomposablePomdp>(loaded))
                                    : std::get<pomdp::PomdpInstance>(loaded);
    char line[320];
    if (mode == "bruteforce") {
        pomdp::BruteForceResult r = pomdp::brute_force_memoryless(inst);
        std::snprintf(line, sizeof line, "bruteforce v* = %.9f  (%ld policies)", r.value, r.enumerated);
        say(g, line);
        if (g.quiet) std::printf("%.9f\n", r.value);
    } else if (mode == "perfect-recall") {
        double v = pomdp::perfect_recall_value(inst);
        std::snprintf(line, sizeof line, "perfect-recall v_PR = %.9f", v);
        say(g, line);
        if (g.quiet) std::printf("%.9f\n", v);
    } else if (mode == "mdp") {
        double v = pomdp::mdp_value(inst);
        std::snprintf(line, sizeof line, "mdp value = %.9f", v);
        say(g, line);
        if (g.quiet) std::printf("%.9f\n", v);
    } else if (mode == "all") {
        pomdp::BruteForceResult bf = pomdp::brute_force_memoryless(inst);
        double vpr = pomdp::perfect_recall_value(inst);
        double zlr = pomdp::solve_relaxation(inst, false).z_lr;
        std::snprintf(line, sizeof line, "z* = %.9f  v_PR = %.9f  z_LR = %.9f", bf.value, vpr, zlr);
        say(g, line);
        const bool ok = bf.value <= vpr + 1e-6 && vpr <= zlr + 1e-6;
        say(g, std::string("chain z* <= v_PR <= z_LR: ") + (ok ? "holds" : "VIOLATED"));
        if (!ok) return kExitIo;
    } else {
        std::cerr << "unknown mode " << mode << "\n";
        return kExitUsage;
    }
    return kExitOk;
}

int cmd_bench(const GlobalFlags& g, const std::string& spec_path, int table, const std::string& out_csv) {
    pomdp::ExperimentSpec spec = pomdp::ExperimentSpec::from_json_file(spec_path);
    std::ostringstream csv;
    if (table == 1) {
        auto rows = pomdp::run_table1(spec);
        pomdp::write_table1_csv(rows, csv, g.no_timing);
    } else if (table == 2) {
        auto rows = pomdp::run_table2(spec);
        pomdp::write_table2_csv(rows, csv, g.no_timing);
    } else {
        std::cerr << "table must be 1 or 2\n";
        return kExitUsage;
    }
    if (!out_csv.empty()) pomdp::write_file_atomic(out_csv, csv.str());
    else std::cout << csv.str();
    say(g, "bench table " + std::to_string(table) + " done");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-horizon POMDP toolkit: exact MILP, fluid relaxation, heuristics"};
    app.require_subcommand(1);

    GlobalFlags g;
    app.add_flag("--quiet", g.quiet, "suppress progress chatter");
    app.add_flag("--no-timing", g.no_timing, "write zeros into timing fields of file outputs");
    app.add_option("--threads", g.threads, "scenario-level parallelism")->default_val(1);

    auto* gen = app.add_subcommand("generate", "write a seeded random instance file");
    int states = 0, obs = 0, actions = 0, horizon = 0, components = 1;
    std::uint64_t seed = 1;
    std::string out, in, mode, heuristic = "alg1", initial_obs, spec_path;
    gen->add_option("--states", states)->required();
    gen->add_option("--obs", obs)->required();
    gen->add_option("--actions", actions)->required();
    gen->add_option("--horizon", horizon)->required();
    gen->add_option("--components", components, "decomposable with M components");
    gen->add_option("--seed", seed)->required();
    gen->add_option("--out", out)->required();

    auto* solve = app.add_subcommand("solve", "solve an instance file");
    bool cuts = false;
    double time_limit = 600.0;
    std::string solve_out;
    solve->add_option("--in", in)->required();
    solve->add_option("--mode", mode, "milp | relax | fluid")->required();
    solve->add_flag("--cuts", cuts, "add the valid inequalities");
    solve->add_option("--initial-obs", initial_obs, "comma-separated 1-based observation per component");
    solve->add_option("--time-limit", time_limit, "seconds");
    solve->add_option("--out", solve_out, "write a result CSV");

    auto* sim = app.add_subcommand("simulate", "Monte-Carlo rollout of a heuristic policy");
    long scenarios = 0;
    int fixed_window = 0;
    std::string sim_out;
    sim->add_option("--in", in)->required();
    sim->add_option("--heuristic", heuristic, "alg1 | greedy");
    sim->add_option("--scenarios", scenarios)->required()->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed)->required();
    sim->add_option("--fixed-window", fixed_window, "rolling window instead of shrinking horizon");
    sim->add_option("--out", sim_out, "write the scenario CSV");

    auto* exact = app.add_subcommand("exact", "exact oracle values at tiny scale");
    exact->add_option("--in", in)->required();
    exact->add_option("--mode", mode, "bruteforce | perfect-recall | mdp | all")->required();

    auto* bench = app.add_subcommand("bench", "run a benchmark table from a spec file");
    int table = 1;
    std::string bench_out;
    bench->add_option("--spec", spec_path)->required();
    bench->add_option("--table", table, "1 or 2")->required();
    bench->add_option("--out", bench_out, "write the table CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") return app.exit(e);
        app.exit(e);
        return kExitUsage;
    }

    try {
        (void)backend_name();
        if (gen->parsed()) return cmd_generate(g, states, obs, actions, horizon, components, seed, out);
        if (solve->parsed()) return cmd_solve(g, in, mode, cuts, initial_obs, time_limit, solve_out);
        if (sim->parsed()) return cmd_simulate(g, in, heuristic, scenarios, seed, fixed_window, sim_out);
        if (exact->parsed()) return cmd_exact(g, in, mode);
        if (bench->parsed()) return cmd_bench(g, spec_path, table, bench_out);
    } catch (const pomdp::SearchSpaceTooLarge& e) {
        std::cerr << "guard: " << e.what() << "\n";
        return kExitGuard;
    } catch (const pomdp::ProductTooLarge& e) {
        std::cerr << "guard: " << e.what() << "\n";
        return kExitGuard;
    } catch (const pomdp::DimensionMismatch& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return kExitUsage;
    } catch (const pomdp::IoError& e) {
        std::cerr << "io: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
