#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "pomdp/errors.hpp"

namespace pomdp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Solver tolerances, fixed for probability-scale data.
inline constexpr double kPivotTol = 1e-9;
inline constexpr double kFeasTol = 1e-7;
inline constexpr double kOptTol = 1e-7;  // reduced-cost tolerance
inline constexpr int kRefactorEvery = 50;

enum class Relation : std::uint8_t { LessEq, Equal, GreaterEq };
enum class LpStatus : std::uint8_t { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(LpStatus s);

// Maximization LP over bounded variables. Constraints hold sparse
// coefficient lists over variable indices; labels are for diagnostics and
// the audit index map.
struct LpProblem {
    struct Variable {
        std::string label;
        double lower = 0.0;
        double upper = kInf;
    };
    struct Constraint {
        std::string label;
        std::vector<std::pair<int, double>> coeffs;
        Relation rel = Relation::Equal;
        double rhs = 0.0;
    };

    std::vector<Variable> variables;
    std::vector<double> objective;  // aligned with variables
    std::vector<Constraint> constraints;

    int add_variable(std::string label, double lower = 0.0, double upper = kInf);
    void set_objective(int var, double coeff) { objective[static_cast<std::size_t>(var)] = coeff; }
    int add_constraint(std::string label, std::vector<std::pair<int, double>> coeffs, Relation rel, double rhs);

    int num_variables() const { return static_cast<int>(variables.size()); }
    int num_constraints() const { return static_cast<int>(constraints.size()); }

    // Coefficient finiteness, index range, label uniqueness.
    void validate() const;
};

struct LpSolution {
    LpStatus status = LpStatus::IterationLimit;
    double objective = 0.0;
    std::vector<double> primal;  // per variable
    std::vector<double> dual;    // per constraint
    long iterations = 0;
};

// Simplex basis snapshot, reusable as a warm start for a problem with the
// same shape (only bounds may differ).
struct SimplexBasis {
    std::vector<std::int32_t> basic;      // column index per row (structurals then logicals)
    std::vector<std::uint8_t> nonbasic;   // per column: 0 basic, 1 at lower, 2 at upper, 3 free at zero
};

struct LpOptions {
    long iteration_limit = 50'000'000;
    const SimplexBasis* warm_start = nullptr;
    SimplexBasis* final_basis = nullptr;
    bool skip_validation = false;  // caller has already validated this shape
};

// Two-phase primal revised simplex (Dantzig pricing, Bland fallback after
// 3*(rows+cols) consecutive degenerate pivots, refactorization every
// kRefactorEvery pivots). Deterministic: fixed tie-breaking throughout.
LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});
LpSolution solve_lp(const LpProblem& problem, long iteration_limit);

struct FeasibilityReport {
    double max_constraint_violation = 0.0;
    double max_bound_violation = 0.0;
    std::string worst_constraint;
    std::string worst_bound;
    bool feasible(double tol = kFeasTol) const {
        return max_constraint_violation <= tol && max_bound_violation <= tol;
    }
};

FeasibilityReport check_feasibility(const LpProblem& problem, const std::vector<double>& point);
// Map keyed by variable label; throws MissingVariable if any label absent.
FeasibilityReport check_feasibility(const LpProblem& problem,
                                    const std::unordered_map<std::string, double>& point);

// Fixed-format text dump (objective line, `label: sum coeff*var REL rhs`
// per constraint, bounds section) for external-solver cross-checks.
void write_lp_text(const LpProblem& problem, std::ostream& os);

}  // namespace pomdp
