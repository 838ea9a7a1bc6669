#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pomdp/milp.hpp"
#include "pomdp/model.hpp"
#include "pomdp/oracle.hpp"
#include "pomdp/pomdp_milp.hpp"

using namespace pomdp;

TEST_CASE("empty binary set behaves like the lp") {
    MilpProblem mp;
    int x = mp.base.add_variable("x", 0.0, 4.0);
    int y = mp.base.add_variable("y", 0.0, 4.0);
    mp.base.set_objective(x, 1.0);
    mp.base.set_objective(y, 2.0);
    mp.base.add_constraint("cap", {{x, 1.0}, {y, 1.0}}, Relation::LessEq, 5.0);
    auto lp_sol = solve_lp(mp.base);
    auto res = solve_milp(mp);
    CHECK(res.status == MilpStatus::Optimal);
    CHECK(res.incumbent == doctest::Approx(lp_sol.objective).epsilon(1e-9));
    CHECK(res.nodes_branched == 0);
    CHECK(res.root_relaxation == doctest::Approx(lp_sol.objective).epsilon(1e-9));
    CHECK(res.final_gap_percent <= 1e-6);
}

TEST_CASE("tiny binary knapsack") {
    MilpProblem mp;
    int x = mp.base.add_variable("x", 0.0, 1.0);
    int y = mp.base.add_variable("y", 0.0, 1.0);
    mp.base.set_objective(x, 1.0);
    mp.base.set_objective(y, 1.0);
    mp.base.add_constraint("cap", {{x, 1.0}, {y, 1.0}}, Relation::LessEq, 1.0);
    mp.binaries = {x, y};
    auto res = solve_milp(mp);
    CHECK(res.status == MilpStatus::Optimal);
    CHECK(res.incumbent == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.incumbent <= res.best_bound + 1e-6);
}

TEST_CASE("fractional relaxation forces branching") {
    // max x+y s.t. 2x+2y <= 3, binary: LP gives 1.5, MILP 1.
    MilpProblem mp;
    int x = mp.base.add_variable("x", 0.0, 1.0);
    int y = mp.base.add_variable("y", 0.0, 1.0);
    mp.base.set_objective(x, 1.0);
    mp.base.set_objective(y, 1.0);
    mp.base.add_constraint("cap", {{x, 2.0}, {y, 2.0}}, Relation::LessEq, 3.0);
    mp.binaries = {x, y};
    auto res = solve_milp(mp);
    CHECK(res.status == MilpStatus::Optimal);
    CHECK(res.incumbent == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.root_relaxation == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(res.integrality_gap_percent == doctest::Approx(50.0).epsilon(1e-6));
    CHECK(res.nodes_branched >= 1);
}

TEST_CASE("integer-infeasible milp is reported infeasible") {
    MilpProblem mp;
    int x = mp.base.add_variable("x", 0.0, 1.0);
    mp.base.set_objective(x, 1.0);
    mp.base.add_constraint("half_lo", {{x, 1.0}}, Relation::GreaterEq, 0.4);
    mp.base.add_constraint("half_hi", {{x, 1.0}}, Relation::LessEq, 0.6);
    mp.binaries = {x};
    auto res = solve_milp(mp);
    CHECK(res.status == MilpStatus::Infeasible);
    CHECK_FALSE(res.has_incumbent());
}

TEST_CASE("lp-infeasible root is reported infeasible") {
    MilpProblem mp;
    int x = mp.base.add_variable("x", 0.0, 1.0);
    mp.base.add_constraint("lo", {{x, 1.0}}, Relation::GreaterEq, 2.0);
    mp.binaries = {x};
    auto res = solve_milp(mp);
    CHECK(res.status == MilpStatus::Infeasible);
}

TEST_CASE("pomdp milp equals brute force on a seeded 2/2/2 T=2 instance") {
    auto inst = generate_random_instance(42, Dims{2, 2, 2, 2});
    auto bf = brute_force_memoryless(inst);
    CHECK(bf.enumerated == 16);  // 2^(2*2)
    auto model = build_pomdp_milp(inst, false);
    auto res = solve_milp(model.problem);
    CHECK(res.status == MilpStatus::Optimal);
    CHECK(res.incumbent == doctest::Approx(bf.value).epsilon(1e-6));
}

TEST_CASE("root relaxation bounds the incumbent and cuts never raise it") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        auto inst = generate_random_instance(seed, Dims{2, 2, 2, 3});
        auto no_cuts = build_pomdp_milp(inst, false);
        auto with_cuts = build_pomdp_milp(inst, true);
        auto rel0 = root_relaxation(no_cuts.problem);
        auto rel1 = root_relaxation(with_cuts.problem);
        auto res = solve_milp(no_cuts.problem);
        CHECK(rel0.objective >= res.incumbent - 1e-7);
        CHECK(rel1.objective <= rel0.objective + 1e-7);  // valid cuts never loosen the bound
    }
}

TEST_CASE("incumbent passes feasibility and integrality") {
    auto inst = generate_random_instance(7, Dims{2, 2, 2, 3});
    auto model = build_pomdp_milp(inst, false);
    auto res = solve_milp(model.problem);
    REQUIRE(res.has_incumbent());
    auto rep = check_feasibility(model.problem.base, res.incumbent_values);
    CHECK(rep.max_constraint_violation <= 1e-7);
    CHECK(rep.max_bound_violation <= 1e-9);
    for (int j : model.problem.binaries) {
        double v = res.incumbent_values[j];
        CHECK(std::min(std::fabs(v), std::fabs(1.0 - v)) <= 1e-6);
    }
}

TEST_CASE("node log is reproducible and bounds are monotone") {
    auto inst = generate_random_instance(19, Dims{2, 2, 2, 3});
    auto model = build_pomdp_milp(inst, false);
    std::ostringstream log1, log2;
    MilpOptions o1;
    o1.node_log = &log1;
    auto r1 = solve_milp(model.problem, o1);
    MilpOptions o2;
    o2.node_log = &log2;
    auto r2 = solve_milp(model.problem, o2);
    CHECK(r1.nodes_processed == r2.nodes_processed);
    CHECK(r1.incumbent == r2.incumbent);
    CHECK(log1.str() == log2.str());
    REQUIRE(log1.str().find(',') != std::string::npos);

    // Popped-node bounds never increase under best-first selection.
    std::istringstream in(log1.str());
    std::string line;
    bool first = true;
    double prev = 0.0;
    while (std::getline(in, line)) {
        auto p1 = line.find(',');
        auto p2 = line.find(',', p1 + 1);
        auto p3 = line.find(',', p2 + 1);
        double bound = std::stod(line.substr(p2 + 1, p3 - p2 - 1));
        if (!first) CHECK(bound <= prev + 1e-9);
        prev = bound;
        first = false;
    }
}

TEST_CASE("fresh node solves match warm-started ones") {
    auto inst = generate_random_instance(23, Dims{2, 2, 2, 3});
    auto model = build_pomdp_milp(inst, true);
    MilpOptions warm;
    MilpOptions cold;
    cold.warm_start_nodes = false;
    auto rw = solve_milp(model.problem, warm);
    auto rc = solve_milp(model.problem, cold);
    CHECK(rw.incumbent == doctest::Approx(rc.incumbent).epsilon(1e-8));
    CHECK(rw.status == MilpStatus::Optimal);
    CHECK(rc.status == MilpStatus::Optimal);
}

TEST_CASE("binary bounds outside the unit box are rejected") {
    MilpProblem mp;
    int x = mp.base.add_variable("x", 0.0, 2.0);
    mp.base.set_objective(x, 1.0);
    mp.binaries = {x};
    CHECK_THROWS_AS(solve_milp(mp), Error);
}
