#include "pomdp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "pomdp/kernels.hpp"

namespace pomdp {

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "Optimal";
        case LpStatus::Infeasible: return "Infeasible";
        case LpStatus::Unbounded: return "Unbounded";
        case LpStatus::IterationLimit: return "IterationLimit";
    }
    return "?";
}

int LpProblem::add_variable(std::string label, double lower, double upper) {
    variables.push_back({std::move(label), lower, upper});
    objective.push_back(0.0);
    return static_cast<int>(variables.size()) - 1;
}

int LpProblem::add_constraint(std::string label, std::vector<std::pair<int, double>> coeffs, Relation rel,
                              double rhs) {
    constraints.push_back({std::move(label), std::move(coeffs), rel, rhs});
    return static_cast<int>(constraints.size()) - 1;
}

void LpProblem::validate() const {
    const int n = num_variables();
    for (int j = 0; j < n; ++j) {
        const auto& v = variables[j];
        if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper) {
            std::ostringstream os;
            os << "variable " << v.label << " has invalid bounds [" << v.lower << ", " << v.upper << "]";
            throw Error(os.str());
        }
        if (!std::isfinite(objective[j])) throw Error("non-finite objective coefficient on " + v.label);
    }
    std::unordered_set<std::string> seen;
    seen.reserve(variables.size() + constraints.size());
    for (const auto& v : variables)
        if (!seen.insert(v.label).second) throw Error("duplicate variable label " + v.label);
    std::unordered_set<std::string> cseen;
    cseen.reserve(constraints.size());
    for (const auto& c : constraints) {
        if (!cseen.insert(c.label).second) throw Error("duplicate constraint label " + c.label);
        if (!std::isfinite(c.rhs)) throw Error("non-finite rhs on " + c.label);
        for (const auto& [j, coef] : c.coeffs) {
            if (j < 0 || j >= n) throw Error("constraint " + c.label + " references unknown variable index");
            if (!std::isfinite(coef)) throw Error("non-finite coefficient on " + c.label);
        }
    }
}

namespace {

enum VStat : std::uint8_t { kStBasic = 0, kStLower = 1, kStUpper = 2, kStFreeZero = 3 };

constexpr double kDegenTol = 1e-12;
constexpr double kEtaDrop = 1e-13;

struct Eta {
    int r = 0;          // basis position of the pivot
    double pivot = 0.0; // spike value at r
    std::vector<std::pair<int, double>> others;
};

// Bounded-variable two-phase primal revised simplex over the internal form
//   A x + s = b,  lb <= (x,s) <= ub,
// with one logical column per row (the fixed logicals on equality rows act
// as the phase-1 artificials). Basis is held as a sparse LU (Eigen)
// refreshed every kRefactorEvery pivots, with product-form eta updates in
// between.
class Simplex {
public:
    Simplex(const LpProblem& p, const LpOptions& opt) : p_(p), opt_(opt) {
        m_ = p.num_constraints();
        n_ = p.num_variables();
        N_ = n_ + m_;
        build_columns();
        build_bounds();
    }

    LpSolution run();

private:
    void build_columns() {
        col_start_.assign(static_cast<std::size_t>(n_) + 1, 0);
        std::size_t nnz = 0;
        for (const auto& c : p_.constraints) nnz += c.coeffs.size();
        row_idx_.resize(nnz);
        cval_.resize(nnz);
        std::vector<int> counts(static_cast<std::size_t>(n_), 0);
        for (const auto& c : p_.constraints)
            for (const auto& [j, v] : c.coeffs) counts[j]++;
        for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + counts[j];
        std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
        for (int i = 0; i < m_; ++i)
            for (const auto& [j, v] : p_.constraints[i].coeffs) {
                row_idx_[fill[j]] = i;
                cval_[fill[j]] = v;
                ++fill[j];
            }
    }

    void build_bounds() {
        lb_.resize(N_);
        ub_.resize(N_);
        obj_.assign(static_cast<std::size_t>(N_), 0.0);
        for (int j = 0; j < n_; ++j) {
            lb_[j] = p_.variables[j].lower;
            ub_[j] = p_.variables[j].upper;
            obj_[j] = p_.objective[j];
        }
        b_.resize(m_);
        for (int i = 0; i < m_; ++i) {
            b_[i] = p_.constraints[i].rhs;
            switch (p_.constraints[i].rel) {
                case Relation::LessEq:
                    lb_[n_ + i] = 0.0;
                    ub_[n_ + i] = kInf;
                    break;
                case Relation::GreaterEq:
                    lb_[n_ + i] = -kInf;
                    ub_[n_ + i] = 0.0;
                    break;
                case Relation::Equal:
                    lb_[n_ + i] = 0.0;
                    ub_[n_ + i] = 0.0;
                    break;
            }
        }
    }

    double nonbasic_value(int j) const {
        switch (vstat_[j]) {
            case kStLower: return lb_[j];
            case kStUpper: return ub_[j];
            default: return 0.0;  // free at zero
        }
    }

    void init_basis_logical() {
        vstat_.assign(static_cast<std::size_t>(N_), kStLower);
        for (int j = 0; j < N_; ++j) {
            if (std::isfinite(lb_[j])) vstat_[j] = kStLower;
            else if (std::isfinite(ub_[j])) vstat_[j] = kStUpper;
            else vstat_[j] = kStFreeZero;
        }
        basic_.resize(m_);
        for (int i = 0; i < m_; ++i) {
            basic_[i] = n_ + i;
            vstat_[n_ + i] = kStBasic;
        }
    }

    bool init_basis_warm(const SimplexBasis& wb) {
        if (static_cast<int>(wb.basic.size()) != m_ || static_cast<int>(wb.nonbasic.size()) != N_) return false;
        vstat_.assign(wb.nonbasic.begin(), wb.nonbasic.end());
        basic_.assign(wb.basic.begin(), wb.basic.end());
        for (int k = 0; k < m_; ++k) {
            int j = basic_[k];
            if (j < 0 || j >= N_) return false;
            vstat_[j] = kStBasic;
        }
        // Nonbasic states must still match finite bounds (bounds may have
        // been tightened between warm starts).
        for (int j = 0; j < N_; ++j) {
            if (vstat_[j] == kStBasic) continue;
            if (vstat_[j] == kStLower && !std::isfinite(lb_[j]))
                vstat_[j] = std::isfinite(ub_[j]) ? kStUpper : kStFreeZero;
            if (vstat_[j] == kStUpper && !std::isfinite(ub_[j]))
                vstat_[j] = std::isfinite(lb_[j]) ? kStLower : kStFreeZero;
        }
        return true;
    }

    bool factorize() {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(row_idx_.size() + static_cast<std::size_t>(m_));
        for (int k = 0; k < m_; ++k) {
            int j = basic_[k];
            if (j < n_) {
                for (int q = col_start_[j]; q < col_start_[j + 1]; ++q)
                    trips.emplace_back(row_idx_[q], k, cval_[q]);
            } else {
                trips.emplace_back(j - n_, k, 1.0);
            }
        }
        Bmat_.resize(m_, m_);
        Bmat_.setFromTriplets(trips.begin(), trips.end());
        Bmat_.makeCompressed();
        lu_.compute(Bmat_);
        if (lu_.info() != Eigen::Success) return false;
        etas_.clear();
        return true;
    }

    void compute_xb() {
        Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(b_.data(), m_);
        for (int j = 0; j < N_; ++j) {
            if (vstat_[j] == kStBasic) continue;
            double v = nonbasic_value(j);
            if (v == 0.0) continue;
            if (j < n_) {
                for (int q = col_start_[j]; q < col_start_[j + 1]; ++q) r[row_idx_[q]] -= cval_[q] * v;
            } else {
                r[j - n_] -= v;
            }
        }
        xb_ = lu_.solve(r);
        for (const Eta& e : etas_) apply_eta(xb_, e);
    }

    static void apply_eta(Eigen::VectorXd& v, const Eta& e) {
        double vr = v[e.r] / e.pivot;
        v[e.r] = vr;
        if (vr != 0.0)
            for (const auto& [i, w] : e.others) v[i] -= w * vr;
    }

    static void apply_eta_transposed(Eigen::VectorXd& y, const Eta& e) {
        double acc = y[e.r];
        for (const auto& [i, w] : e.others) acc -= w * y[i];
        y[e.r] = acc / e.pivot;
    }

    // w = B^-1 * (column j of [A | I])
    void ftran_column(int j, Eigen::VectorXd& w) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
        if (j < n_) {
            for (int q = col_start_[j]; q < col_start_[j + 1]; ++q) rhs[row_idx_[q]] = cval_[q];
        } else {
            rhs[j - n_] = 1.0;
        }
        w = lu_.solve(rhs);
        for (const Eta& e : etas_) apply_eta(w, e);
    }

    // y = B^-T * cb
    void btran(const Eigen::VectorXd& cb, Eigen::VectorXd& y) {
        y = cb;
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) apply_eta_transposed(y, *it);
        y = lu_.transpose().solve(y);
    }

    double infeasibility() const {
        double worst = 0.0;
        for (int k = 0; k < m_; ++k) {
            int j = basic_[k];
            double x = xb_[k];
            if (x < lb_[j] - worst) worst = std::max(worst, lb_[j] - x);
            if (x > ub_[j] + worst) worst = std::max(worst, x - ub_[j]);
        }
        return worst;
    }

    // Phase-1 costs live on infeasible basic variables only.
    void phase_costs(bool phase1, Eigen::VectorXd& cb) const {
        cb.resize(m_);
        for (int k = 0; k < m_; ++k) {
            int j = basic_[k];
            if (phase1) {
                double x = xb_[k];
                if (x < lb_[j] - kFeasTol) cb[k] = 1.0;
                else if (x > ub_[j] + kFeasTol) cb[k] = -1.0;
                else cb[k] = 0.0;
            } else {
                cb[k] = obj_[j];
            }
        }
    }

    double reduced_cost(int j, const Eigen::VectorXd& y, bool phase1) const {
        double cj = phase1 ? 0.0 : obj_[j];
        if (j < n_) {
            double acc = 0.0;
            for (int q = col_start_[j]; q < col_start_[j + 1]; ++q) acc += cval_[q] * y[row_idx_[q]];
            return cj - acc;
        }
        return cj - y[j - n_];
    }

    // Entering column under Dantzig (or Bland when bland_ is set).
    // Returns -1 when no eligible column improves.
    int choose_entering(const Eigen::VectorXd& y, bool phase1, int& sigma_out) {
        int best = -1, best_sigma = 0;
        double best_score = kOptTol;
        for (int j = 0; j < N_; ++j) {
            if (vstat_[j] == kStBasic) continue;
            if (lb_[j] == ub_[j]) continue;  // fixed, cannot move
            double d = reduced_cost(j, y, phase1);
            int sigma = 0;
            if ((vstat_[j] == kStLower || vstat_[j] == kStFreeZero) && d > kOptTol) sigma = 1;
            else if ((vstat_[j] == kStUpper || vstat_[j] == kStFreeZero) && d < -kOptTol) sigma = -1;
            if (sigma == 0) continue;
            if (bland_) {
                sigma_out = sigma;
                return j;  // lowest index eligible
            }
            double score = std::fabs(d);
            if (score > best_score) {
                best_score = score;
                best = j;
                best_sigma = sigma;
            }
        }
        sigma_out = best_sigma;
        return best;
    }

    struct Ratio {
        double t = kInf;
        int pos = -1;          // leaving basis position, -1 = entering bound flip
        bool to_upper = false; // leaving variable ends at its upper bound
        bool unbounded = false;
    };

    Ratio ratio_test(int q, int sigma, const Eigen::VectorXd& w, bool phase1) {
        Ratio out;
        double tmin = kInf;
        for (int k = 0; k < m_; ++k) {
            double wk = w[k];
            if (std::fabs(wk) <= kPivotTol) continue;
            int j = basic_[k];
            double rate = -sigma * wk;  // d x_B[k] / dt
            double x = xb_[k];
            double t;
            if (phase1 && x < lb_[j] - kFeasTol) {
                if (rate <= 0.0) continue;            // moving further below: no bound that way
                t = (lb_[j] - x) / rate;              // stops on reaching feasibility
            } else if (phase1 && x > ub_[j] + kFeasTol) {
                if (rate >= 0.0) continue;
                t = (x - ub_[j]) / (-rate);
            } else if (rate > 0.0) {
                if (!std::isfinite(ub_[j])) continue;
                t = (ub_[j] - x) / rate;
            } else {
                if (!std::isfinite(lb_[j])) continue;
                t = (x - lb_[j]) / (-rate);
            }
            if (t < 0.0) t = 0.0;
            if (t < tmin) tmin = t;
        }
        double tflip = (std::isfinite(lb_[q]) && std::isfinite(ub_[q])) ? ub_[q] - lb_[q] : kInf;
        if (tflip <= tmin && std::isfinite(tflip)) {
            out.t = tflip;
            out.pos = -1;
            return out;
        }
        if (!std::isfinite(tmin)) {
            out.unbounded = true;
            return out;
        }
        // Tie band, then largest |w| for stability (Bland: lowest variable
        // index) with lowest position as the final tie-break.
        int best = -1;
        double best_w = -1.0;
        for (int k = 0; k < m_; ++k) {
            double wk = w[k];
            if (std::fabs(wk) <= kPivotTol) continue;
            int j = basic_[k];
            double rate = -sigma * wk;
            double x = xb_[k];
            double t;
            bool toward_upper;
            if (phase1 && x < lb_[j] - kFeasTol) {
                if (rate <= 0.0) continue;
                t = (lb_[j] - x) / rate;
                toward_upper = false;
            } else if (phase1 && x > ub_[j] + kFeasTol) {
                if (rate >= 0.0) continue;
                t = (x - ub_[j]) / (-rate);
                toward_upper = true;
            } else if (rate > 0.0) {
                if (!std::isfinite(ub_[j])) continue;
                t = (ub_[j] - x) / rate;
                toward_upper = true;
            } else {
                if (!std::isfinite(lb_[j])) continue;
                t = (x - lb_[j]) / (-rate);
                toward_upper = false;
            }
            if (t < 0.0) t = 0.0;
            if (t > tmin + kDegenTol) continue;
            if (bland_) {
                if (best == -1 || basic_[k] < basic_[best]) {
                    best = k;
                    out.to_upper = toward_upper;
                }
            } else if (std::fabs(wk) > best_w) {
                best_w = std::fabs(wk);
                best = k;
                out.to_upper = toward_upper;
            }
        }
        out.t = tmin;
        out.pos = best;
        if (best == -1) out.unbounded = true;  // numerical: no admissible pivot
        return out;
    }

    void apply_step(int q, int sigma, const Eigen::VectorXd& w, const Ratio& r) {
        double t = r.t;
        if (t != 0.0)
            for (int k = 0; k < m_; ++k) xb_[k] -= t * sigma * w[k];
        double enter_from = nonbasic_value(q);
        double enter_val = enter_from + sigma * t;
        if (r.pos < 0) {  // bound flip
            vstat_[q] = (sigma > 0) ? kStUpper : kStLower;
            return;
        }
        int leave = basic_[r.pos];
        vstat_[leave] = r.to_upper ? kStUpper : kStLower;
        if (!std::isfinite(r.to_upper ? ub_[leave] : lb_[leave]))
            vstat_[leave] = kStFreeZero;  // should not happen; defensive for free vars
        basic_[r.pos] = q;
        vstat_[q] = kStBasic;
        xb_[r.pos] = enter_val;

        Eta e;
        e.r = r.pos;
        e.pivot = w[r.pos];
        e.others.reserve(16);
        for (int k = 0; k < m_; ++k)
            if (k != r.pos && std::fabs(w[k]) > kEtaDrop) e.others.emplace_back(k, w[k]);
        etas_.push_back(std::move(e));
        ++pivots_since_factor_;
    }

    void refactor_or_throw() {
        if (!factorize()) {
            // Numerically singular basis: rebuild from scratch once.
            init_basis_logical();
            if (!factorize()) throw BasisSingular("basis factorization failed twice");
            restarted_ = true;
        }
        compute_xb();
        pivots_since_factor_ = 0;
    }

    LpSolution assemble(LpStatus status, long iters) {
        LpSolution sol;
        sol.status = status;
        sol.iterations = iters;
        std::vector<double> x(static_cast<std::size_t>(N_), 0.0);
        for (int j = 0; j < N_; ++j)
            if (vstat_[j] != kStBasic) x[j] = nonbasic_value(j);
        for (int k = 0; k < m_; ++k) {
            int j = basic_[k];
            double v = xb_[k];
            if (status == LpStatus::Optimal) {  // snap residual bound noise
                if (v < lb_[j] && v > lb_[j] - kFeasTol) v = lb_[j];
                if (v > ub_[j] && v < ub_[j] + kFeasTol) v = ub_[j];
            }
            x[j] = v;
        }
        sol.primal.assign(x.begin(), x.begin() + n_);
        sol.objective = kern::dot(sol.primal.data(), p_.objective.data(), static_cast<std::size_t>(n_));
        Eigen::VectorXd cb, y;
        phase_costs(false, cb);
        btran(cb, y);
        sol.dual.assign(y.data(), y.data() + m_);
        if (status == LpStatus::Unbounded) sol.objective = kInf;
        return sol;
    }

    const LpProblem& p_;
    const LpOptions& opt_;
    int m_ = 0, n_ = 0, N_ = 0;
    std::vector<int> col_start_, row_idx_;
    std::vector<double> cval_;
    std::vector<double> lb_, ub_, obj_, b_;
    std::vector<std::uint8_t> vstat_;
    std::vector<int> basic_;
    Eigen::SparseMatrix<double> Bmat_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    std::vector<Eta> etas_;
    Eigen::VectorXd xb_;
    long pivots_since_factor_ = 0;
    bool bland_ = false;
    bool restarted_ = false;
};

LpSolution Simplex::run() {
    bool warm = false;
    if (opt_.warm_start) warm = init_basis_warm(*opt_.warm_start);
    if (!warm) init_basis_logical();
    if (!factorize()) {
        init_basis_logical();
        if (!factorize()) throw BasisSingular("initial basis factorization failed");
    }
    compute_xb();

    long iters = 0;
    long degen_streak = 0;
    const long bland_after = 3L * (m_ + N_);
    Eigen::VectorXd cb, y, w;

    bool phase1 = infeasibility() > kFeasTol;
    for (;;) {
        if (iters >= opt_.iteration_limit) {
            LpSolution sol = assemble(LpStatus::IterationLimit, iters);
            if (opt_.final_basis) *opt_.final_basis = {std::vector<std::int32_t>(basic_.begin(), basic_.end()),
                                                       vstat_};
            return sol;
        }
        if (phase1 && infeasibility() <= kFeasTol) {
            phase1 = false;
            degen_streak = 0;
            bland_ = false;
        }
        phase_costs(phase1, cb);
        btran(cb, y);
        int sigma = 0;
        int q = choose_entering(y, phase1, sigma);
        if (q < 0) {
            LpStatus status;
            if (phase1) {
                status = LpStatus::Infeasible;
            } else {
                status = LpStatus::Optimal;
                refactor_or_throw();  // tight final values
            }
            LpSolution sol = assemble(status, iters);
            if (opt_.final_basis) *opt_.final_basis = {std::vector<std::int32_t>(basic_.begin(), basic_.end()),
                                                       vstat_};
            return sol;
        }
        ftran_column(q, w);
        Ratio r = ratio_test(q, sigma, w, phase1);
        if (r.unbounded) {
            if (phase1) {
                // An improving phase-1 ray cannot exist; retry on fresh
                // numerics, then give up.
                if (!restarted_) {
                    refactor_or_throw();
                    continue;
                }
                throw BasisSingular("phase-1 ray despite bounded infeasibility");
            }
            LpSolution sol = assemble(LpStatus::Unbounded, iters);
            if (opt_.final_basis) *opt_.final_basis = {std::vector<std::int32_t>(basic_.begin(), basic_.end()),
                                                       vstat_};
            return sol;
        }
        apply_step(q, sigma, w, r);
        ++iters;
        if (r.t <= kDegenTol) {
            if (++degen_streak > bland_after) bland_ = true;
        } else {
            degen_streak = 0;
            bland_ = false;
        }
        if (pivots_since_factor_ >= kRefactorEvery) refactor_or_throw();
    }
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options) {
    if (!options.skip_validation) problem.validate();
    Simplex s(problem, options);
    return s.run();
}

LpSolution solve_lp(const LpProblem& problem, long iteration_limit) {
    LpOptions opt;
    opt.iteration_limit = iteration_limit;
    return solve_lp(problem, opt);
}

FeasibilityReport check_feasibility(const LpProblem& problem, const std::vector<double>& point) {
    if (point.size() != problem.variables.size())
        throw MissingVariable("point covers " + std::to_string(point.size()) + " of " +
                              std::to_string(problem.variables.size()) + " variables");
    FeasibilityReport rep;
    for (const auto& c : problem.constraints) {
        double lhs = 0.0;
        for (const auto& [j, v] : c.coeffs) lhs += v * point[j];
        double viol = 0.0;
        switch (c.rel) {
            case Relation::LessEq: viol = lhs - c.rhs; break;
            case Relation::GreaterEq: viol = c.rhs - lhs; break;
            case Relation::Equal: viol = std::fabs(lhs - c.rhs); break;
        }
        if (viol > rep.max_constraint_violation) {
            rep.max_constraint_violation = viol;
            rep.worst_constraint = c.label;
        }
    }
    for (std::size_t j = 0; j < problem.variables.size(); ++j) {
        const auto& v = problem.variables[j];
        double viol = std::max(v.lower - point[j], point[j] - v.upper);
        if (viol > rep.max_bound_violation) {
            rep.max_bound_violation = viol;
            rep.worst_bound = v.label;
        }
    }
    return rep;
}

FeasibilityReport check_feasibility(const LpProblem& problem,
                                    const std::unordered_map<std::string, double>& point) {
    std::vector<double> x(problem.variables.size(), 0.0);
    for (std::size_t j = 0; j < problem.variables.size(); ++j) {
        auto it = point.find(problem.variables[j].label);
        if (it == point.end()) throw MissingVariable("point is missing " + problem.variables[j].label);
        x[j] = it->second;
    }
    return check_feasibility(problem, x);
}

void write_lp_text(const LpProblem& problem, std::ostream& os) {
    os << "maximize:";
    for (std::size_t j = 0; j < problem.variables.size(); ++j)
        if (problem.objective[j] != 0.0) os << " " << problem.objective[j] << "*" << problem.variables[j].label;
    os << "\nsubject to:\n";
    for (const auto& c : problem.constraints) {
        os << c.label << ":";
        for (const auto& [j, v] : c.coeffs) os << " " << v << "*" << problem.variables[j].label;
        switch (c.rel) {
            case Relation::LessEq: os << " <= "; break;
            case Relation::Equal: os << " = "; break;
            case Relation::GreaterEq: os << " >= "; break;
        }
        os << c.rhs << "\n";
    }
    os << "bounds:\n";
    for (const auto& v : problem.variables) os << v.lower << " <= " << v.label << " <= " << v.upper << "\n";
}

}  // namespace pomdp
