#include "pomdp/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <ostream>
#include <queue>

namespace pomdp {

namespace {

constexpr double kIntTol = 1e-6;
constexpr long kDiveEvery = 128;  // primal heuristic cadence (in processed nodes)

double rel_gap_percent(double zbar, double z) { return 100.0 * (zbar - z) / std::max(std::fabs(z), 1e-9); }

struct Node {
    double bound = kInf;
    long id = 0;
    int depth = 0;
    std::vector<std::pair<int, int>> fixings;  // (variable, 0/1)
    std::shared_ptr<SimplexBasis> warm;
};

struct NodeOrder {
    // Max-heap on bound; FIFO among equal bounds.
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound < b.bound;
        return a.id > b.id;
    }
};

class BranchAndBound {
public:
    BranchAndBound(const MilpProblem& problem, const MilpOptions& options)
        : p_(problem), opt_(options), work_(problem.base), binaries_(problem.binaries) {
        std::sort(binaries_.begin(), binaries_.end());
        t0_ = std::chrono::steady_clock::now();
    }

    MilpResult run();

private:
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

    LpSolution solve_node(const std::vector<std::pair<int, int>>& fixings, const SimplexBasis* warm,
                          SimplexBasis* out) {
        for (const auto& [var, val] : fixings) {
            work_.variables[var].lower = val;
            work_.variables[var].upper = val;
        }
        LpOptions lopt;
        lopt.iteration_limit = opt_.lp_iteration_limit;
        lopt.skip_validation = true;
        lopt.final_basis = out;
        if (opt_.warm_start_nodes && warm) lopt.warm_start = warm;
        LpSolution sol = solve_lp(work_, lopt);
        for (const auto& [var, val] : fixings) {
            work_.variables[var].lower = p_.base.variables[var].lower;
            work_.variables[var].upper = p_.base.variables[var].upper;
        }
        if (sol.status == LpStatus::IterationLimit)
            throw Error("node LP hit the iteration limit; raise lp_iteration_limit");
        if (sol.status == LpStatus::Unbounded) throw Error("MILP relaxation is unbounded");
        return sol;
    }

    int most_fractional(const std::vector<double>& x) const {
        int best = -1;
        double best_dist = kIntTol;
        for (int j : binaries_) {
            double v = x[j];
            double dist = std::min(std::fabs(v), std::fabs(1.0 - v));
            if (dist > best_dist) {
                best_dist = dist;
                best = j;
            }
        }
        return best;
    }

    void offer_incumbent(double obj, const std::vector<double>& values) {
        if (obj > incumbent_) {
            incumbent_ = obj;
            incumbent_values_ = values;
        }
    }

    // Set-partitioning rows (sum of unit-coefficient binaries equal to 1)
    // drive the primal dive; leftovers fall back to rounding.
    void detect_sos1_rows() {
        std::vector<char> is_bin(work_.variables.size(), 0);
        for (int j : binaries_) is_bin[j] = 1;
        for (const auto& c : p_.base.constraints) {
            if (c.rel != Relation::Equal || c.rhs != 1.0 || c.coeffs.empty()) continue;
            bool ok = true;
            for (const auto& [j, v] : c.coeffs)
                if (v != 1.0 || !is_bin[j]) { ok = false; break; }
            if (ok) {
                std::vector<int> members;
                members.reserve(c.coeffs.size());
                for (const auto& [j, v] : c.coeffs) members.push_back(j);
                sos1_rows_.push_back(std::move(members));
            }
        }
    }

    // Guided dive: repeatedly pick the undecided partition row whose
    // largest member value is highest, fix that member to 1 (siblings to
    // 0), and re-solve. One LP per row, then one rounding pass for any
    // binaries outside partition rows.
    void round_and_dive(const std::vector<std::pair<int, int>>& base_fixings, const LpSolution& from,
                        const SimplexBasis* warm) {
        std::vector<std::pair<int, int>> fix = base_fixings;
        std::vector<char> fixed(work_.variables.size(), 0);
        for (const auto& [var, val] : base_fixings) fixed[var] = 1;
        LpSolution dsol = from;
        SimplexBasis cur = warm ? *warm : SimplexBasis{};
        const SimplexBasis* cur_warm = warm ? &cur : nullptr;

        std::vector<char> row_done(sos1_rows_.size(), 0);
        for (;;) {
            int best_row = -1;
            double best_conf = -1.0;
            for (std::size_t r = 0; r < sos1_rows_.size(); ++r) {
                if (row_done[r]) continue;
                bool all_fixed = true;
                double conf = -1.0;
                for (int j : sos1_rows_[r]) {
                    if (!fixed[j]) all_fixed = false;
                    conf = std::max(conf, dsol.primal[j]);
                }
                if (all_fixed) {
                    row_done[r] = 1;
                    continue;
                }
                if (conf > best_conf) {
                    best_conf = conf;
                    best_row = static_cast<int>(r);
                }
            }
            if (best_row < 0) break;
            const auto& row = sos1_rows_[best_row];
            int pick = row[0];
            for (int j : row)
                if (dsol.primal[j] > dsol.primal[pick]) pick = j;
            for (int j : row) {
                if (fixed[j]) continue;
                fix.emplace_back(j, j == pick ? 1 : 0);
                fixed[j] = 1;
            }
            row_done[best_row] = 1;
            SimplexBasis nb;
            dsol = solve_node(fix, cur_warm, &nb);
            if (dsol.status != LpStatus::Optimal) return;  // dead end
            cur = std::move(nb);
            cur_warm = &cur;
        }
        // Any binaries not covered by a partition row: round them in one shot.
        bool extra = false;
        for (int j : binaries_)
            if (!fixed[j]) {
                fix.emplace_back(j, dsol.primal[j] >= 0.5 ? 1 : 0);
                fixed[j] = 1;
                extra = true;
            }
        if (extra) {
            SimplexBasis nb;
            dsol = solve_node(fix, cur_warm, &nb);
            if (dsol.status != LpStatus::Optimal) return;
        }
        if (most_fractional(dsol.primal) < 0) offer_incumbent(dsol.objective, dsol.primal);
    }

    const MilpProblem& p_;
    const MilpOptions& opt_;
    LpProblem work_;
    std::vector<int> binaries_;
    std::vector<std::vector<int>> sos1_rows_;
    std::chrono::steady_clock::time_point t0_;
    double incumbent_ = -kInf;
    std::vector<double> incumbent_values_;
};

MilpResult BranchAndBound::run() {
    MilpResult res;
    detect_sos1_rows();
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long next_id = 0;
    open.push(Node{kInf, next_id++, 0, {}, nullptr});
    bool root_solved = false;

    auto prune_eps = [&] { return opt_.gap_tolerance * std::max(std::fabs(incumbent_), 1e-9); };

    MilpStatus status = MilpStatus::Optimal;
    while (!open.empty()) {
        if (elapsed() > opt_.time_limit_seconds) {
            status = MilpStatus::TimeLimit;
            break;
        }
        Node node = open.top();
        if (incumbent_ > -kInf && node.bound <= incumbent_ + prune_eps()) break;  // tree exhausted
        open.pop();

        SimplexBasis fb;
        LpSolution sol = solve_node(node.fixings, node.warm.get(), &fb);
        ++res.nodes_processed;
        if (!root_solved) {
            root_solved = true;
            if (sol.status == LpStatus::Infeasible) {
                res.status = MilpStatus::Infeasible;
                res.root_relaxation = -kInf;
                res.best_bound = -kInf;
                res.wall_seconds = elapsed();
                res.final_gap_percent = kInf;
                res.integrality_gap_percent = kInf;
                return res;
            }
            res.root_relaxation = sol.objective;
        }
        if (sol.status == LpStatus::Infeasible) continue;

        const double obj = sol.objective;
        if (opt_.node_log)  // bound column: the global best bound at the pop
            (*opt_.node_log) << node.id << "," << node.depth << "," << node.bound << "," << incumbent_ << "\n";
        if (incumbent_ > -kInf && obj <= incumbent_ + prune_eps()) continue;

        int branch_var = most_fractional(sol.primal);
        if (branch_var < 0) {
            offer_incumbent(obj, sol.primal);
            continue;
        }

        if (res.nodes_processed == 1 || res.nodes_processed % kDiveEvery == 0)
            round_and_dive(node.fixings, sol, &fb);

        ++res.nodes_branched;
        auto warm = std::make_shared<SimplexBasis>(std::move(fb));
        for (int val = 0; val <= 1; ++val) {
            Node child;
            child.bound = obj;
            child.id = next_id++;
            child.depth = node.depth + 1;
            child.fixings = node.fixings;
            child.fixings.emplace_back(branch_var, val);
            child.warm = warm;
            open.push(std::move(child));
        }
    }

    res.wall_seconds = elapsed();
    res.incumbent = incumbent_;
    res.incumbent_values = std::move(incumbent_values_);
    const double open_bound = open.empty() ? -kInf : open.top().bound;
    if (res.has_incumbent()) {
        res.best_bound = std::max(incumbent_, open_bound);
        res.status = status;
    } else {
        res.status = (status == MilpStatus::TimeLimit) ? MilpStatus::TimeLimit : MilpStatus::Infeasible;
        res.best_bound = open_bound;
    }
    res.final_gap_percent = res.has_incumbent() ? rel_gap_percent(res.best_bound, res.incumbent) : kInf;
    res.integrality_gap_percent =
        res.has_incumbent() ? rel_gap_percent(res.root_relaxation, res.incumbent) : kInf;
    return res;
}

}  // namespace

const char* to_string(MilpStatus s) {
    switch (s) {
        case MilpStatus::Optimal: return "Optimal";
        case MilpStatus::TimeLimit: return "TimeLimit";
        case MilpStatus::Infeasible: return "Infeasible";
    }
    return "?";
}

void MilpProblem::validate() const {
    base.validate();
    for (int j : binaries) {
        if (j < 0 || j >= base.num_variables()) throw Error("binary index out of range");
        const auto& v = base.variables[j];
        if (v.lower < -kIntTol || v.upper > 1.0 + kIntTol)
            throw Error("binary variable " + v.label + " has bounds outside [0,1]");
    }
}

LpSolution root_relaxation(const MilpProblem& problem, long iteration_limit) {
    problem.validate();
    return solve_lp(problem.base, iteration_limit);
}

MilpResult solve_milp(const MilpProblem& problem, const MilpOptions& options) {
    problem.validate();
    BranchAndBound bb(problem, options);
    return bb.run();
}

}  // namespace pomdp
