// Depth-first branch-and-bound over the binary columns of a MilpModel.

#pragma once

#include "h2bid/milp_model.hpp"
#include "h2bid/simplex.hpp"

#include <Eigen/Core>

namespace h2bid {

enum class MilpStatus { Optimal, Infeasible, Unbounded, GapLimit, NodeLimit };

const char* to_string(MilpStatus status);

struct MilpSolution {
    MilpStatus status = MilpStatus::Infeasible;
    bool has_incumbent = false;
    double objective = 0.0;   // incumbent, maximization sense
    double best_bound = 0.0;
    Eigen::VectorXd x;
    long nodes = 0;
    long lp_iterations = 0;
    double seconds = 0.0;
    // Nodes whose relaxation exceeded their parent's; always 0 for a sound search.
    long bound_violations = 0;

    double relative_gap() const;
};

/// Dives 1-branch first on the variable picked by `config.branching` and backs
/// up to the open node with the best bound. Node relaxations are re-solved
/// with the dual simplex from the parent basis.
MilpSolution solve_milp(const MilpModel& model, const SolverConfig& config = {});

}  // namespace h2bid
