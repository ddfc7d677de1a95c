// Bridge to an external MILP solver through CPLEX-LP files.
//
// The backend is a command line: `<command> <model.lp> <solution.txt>`. It
// must write a solution file of the form
//   status optimal|infeasible|unbounded|limit
//   objective <value>
//   <column name> <value>      (one per column, for optimal/limit)

#pragma once

#include "h2bid/branch_and_bound.hpp"

#include <filesystem>
#include <string>

namespace h2bid {

/// The configured backend cannot be run.
class CapabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExternalSolverOptions {
    std::string command;  // empty: taken from $H2BID_EXTERNAL_SOLVER
    std::filesystem::path work_dir;  // empty: system temp directory
};

/// True when the backend answers `<command> --check` with exit status 0.
bool external_solver_available(const ExternalSolverOptions& options = {});

/// Same contract as solve_milp. Throws CapabilityError when the backend is
/// missing or fails to produce a solution file, never falls back silently.
MilpSolution solve_milp_external(const MilpModel& model, const SolverConfig& config = {},
                                 const ExternalSolverOptions& options = {});

}  // namespace h2bid
