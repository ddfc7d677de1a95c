// Bounded-variable revised simplex: two-phase primal for cold starts and
// dual simplex for re-solves after bound changes (branch-and-bound nodes).

#pragma once

#include "h2bid/milp_model.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

namespace h2bid {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class BranchRule { MostFractional, FirstFractional, PseudoCost };

/// Which child of a branching a dive continues into; the other is queued.
enum class ChildOrder { OneFirst, Nearest };

struct SolverConfig {
    double gap_tol = 1e-6;   // relative, (bound - incumbent) / max(1, |incumbent|)
    double int_tol = 1e-6;
    double feas_tol = 1e-7;  // row residual accepted for an incumbent
    long node_limit = 1'000'000;
    std::optional<double> time_limit;  // seconds
    BranchRule branching = BranchRule::PseudoCost;
    ChildOrder child_order = ChildOrder::OneFirst;
    // Run the diving heuristic at the root and at every n-th fractional node
    // after it; 0 turns it off.
    int dive_every = 10;
    std::ostream* node_log = nullptr;
};

std::vector<std::string> config_issues(const SolverConfig& config);

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

/// Snapshot of a simplex basis; columns are structurals, then one slack and
/// one artificial per row.
struct Basis {
    enum class State : std::uint8_t { Basic, AtLower, AtUpper, Free };
    std::vector<int> head;
    std::vector<State> state;
    std::vector<double> artificial_sign;
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;  // maximization sense
    Eigen::VectorXd x;       // structural values
    Eigen::VectorXd duals;   // one per row, for the maximization problem
    Basis basis;
    long iterations = 0;
    double max_dual_infeasibility = 0.0;
};

/// LU factors of the basis matrix plus a product-form eta file of the pivots
/// since the last refactorization.
class BasisFactor {
public:
    bool factor(const Eigen::SparseMatrix<double>& basis_matrix);
    void ftran(Eigen::VectorXd& v) const;
    void btran(Eigen::VectorXd& v) const;
    void push(const Eigen::VectorXd& column, int pivot_row);
    int updates() const { return static_cast<int>(etas_.size()); }

private:
    struct Eta {
        int row;
        double pivot;
        std::vector<std::pair<int, double>> entries;  // off-pivot part of the column
    };
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
    std::vector<Eta> etas_;
    bool empty_ = false;  // no rows, nothing to factor
};

class SimplexEngine {
public:
    SimplexEngine(const MilpModel& model, SolverConfig config = {});

    int num_structurals() const { return n_; }
    int num_rows() const { return m_; }

    void set_bounds(int col, double lo, double hi);
    double lower(int col) const { return lo_[col]; }
    double upper(int col) const { return up_[col]; }

    /// Two-phase primal simplex from a slack/artificial basis.
    LpSolution solve();
    /// Re-optimizes from the current (or a loaded) basis after bound changes.
    LpSolution resolve();
    void load_basis(const Basis& basis);
    Basis basis() const;

    long total_iterations() const { return total_iterations_; }

private:
    using State = Basis::State;
    enum class Outcome { Optimal, Unbounded, Infeasible, Stalled, NotDualFeasible };

    template <typename F>
    void for_column(int j, F&& f) const;
    double column_dot(const Eigen::VectorXd& y, int j) const;
    void column_dense(int j, Eigen::VectorXd& out) const;

    void set_nonbasic_value(int j);
    void refactor();
    void recompute_primal();
    void compute_duals(const Eigen::VectorXd& cost, Eigen::VectorXd& y) const;
    double reduced_cost(const Eigen::VectorXd& cost, const Eigen::VectorXd& y, int j) const;
    bool primal_feasible() const;
    void pivot(int entering, int position, const Eigen::VectorXd& w);

    Outcome primal_loop(const Eigen::VectorXd& cost);
    Outcome dual_loop();
    bool make_dual_feasible();
    void drive_out_artificials();
    void start_cold();
    LpSolution finish(Outcome outcome, long iterations_before);
    void tick();

    int n_ = 0;
    int m_ = 0;
    int cols_ = 0;
    Eigen::SparseMatrix<double> a_;
    Eigen::VectorXd b_;
    Eigen::VectorXd cost_;
    Eigen::VectorXd lo_;
    Eigen::VectorXd up_;
    Eigen::VectorXd x_;
    std::vector<int> head_;
    std::vector<int> position_;
    std::vector<State> state_;
    std::vector<double> art_sign_;
    BasisFactor factor_;
    bool has_basis_ = false;
    bool bland_ = false;
    long solve_iterations_ = 0;
    long total_iterations_ = 0;
    double dual_tol_ = 1e-9;
    SolverConfig config_;
    const MilpModel* model_;
};

/// Solves the continuous relaxation of `model` (integrality ignored).
LpSolution solve_lp(const MilpModel& model, const SolverConfig& config = {});

}  // namespace h2bid
