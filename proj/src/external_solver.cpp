#include "h2bid/external_solver.hpp"

#include "h2bid/lp_format.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <unistd.h>

namespace h2bid {

namespace fs = std::filesystem;

namespace {

std::string resolve_command(const ExternalSolverOptions& options) {
    if (!options.command.empty()) return options.command;
    const char* env = std::getenv("H2BID_EXTERNAL_SOLVER");
    return env ? std::string(env) : std::string();
}

std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "'\\''";
        else out += c;
    }
    return out + "'";
}

}  // namespace

bool external_solver_available(const ExternalSolverOptions& options) {
    const std::string command = resolve_command(options);
    if (command.empty()) return false;
    return std::system((command + " --check >/dev/null 2>&1").c_str()) == 0;
}

MilpSolution solve_milp_external(const MilpModel& model, const SolverConfig& config,
                                 const ExternalSolverOptions& options) {
    const std::string command = resolve_command(options);
    if (command.empty()) throw CapabilityError("no external solver configured");
    if (auto issues = model.structural_issues(); !issues.empty()) throw SolverError("malformed model: " + issues.front());

    // Generic names keep the file valid whatever the model calls its columns.
    MilpModel renamed = model;
    for (int j = 0; j < renamed.num_vars(); ++j) renamed.names[j] = "c" + std::to_string(j);

    const fs::path dir = options.work_dir.empty() ? fs::temp_directory_path() : options.work_dir;
    const std::string stem = "h2bid_" + std::to_string(::getpid()) + "_" +
                             std::to_string(std::chrono::steady_clock::now().time_since_epoch().count());
    const fs::path lp_path = dir / (stem + ".lp");
    const fs::path sol_path = dir / (stem + ".sol");
    {
        std::ofstream out(lp_path);
        if (!out) throw CapabilityError("cannot write " + lp_path.string());
        write_lp(out, renamed);
    }

    std::ostringstream cmd;
    cmd << command << ' ' << quote(lp_path.string()) << ' ' << quote(sol_path.string()) << " --gap "
        << config.gap_tol;
    if (config.time_limit) cmd << " --time-limit " << *config.time_limit;
    cmd << " >/dev/null 2>&1";
    const auto start = std::chrono::steady_clock::now();
    const int rc = std::system(cmd.str().c_str());
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

    std::ifstream in(sol_path);
    std::error_code ignored;
    fs::remove(lp_path, ignored);
    if (rc != 0 || !in) {
        fs::remove(sol_path, ignored);
        throw CapabilityError("external solver failed (exit status " + std::to_string(rc) + "): " + command);
    }

    MilpSolution out;
    out.seconds = elapsed.count();
    std::string key, status;
    in >> key >> status;
    if (key != "status") throw CapabilityError("malformed solution file from " + command);
    in >> key >> out.objective;
    if (key != "objective") throw CapabilityError("malformed solution file from " + command);
    std::unordered_map<std::string, double> values;
    std::string name;
    double v = 0.0;
    while (in >> name >> v) values[name] = v;
    in.close();
    fs::remove(sol_path, ignored);

    if (status == "infeasible") {
        out.status = MilpStatus::Infeasible;
        return out;
    }
    if (status == "unbounded") {
        out.status = MilpStatus::Unbounded;
        return out;
    }
    out.x = Eigen::VectorXd::Zero(model.num_vars());
    for (int j = 0; j < model.num_vars(); ++j) {
        auto it = values.find(renamed.names[j]);
        if (it == values.end()) throw CapabilityError("solution file misses column " + renamed.names[j]);
        out.x[j] = model.binary[j] ? std::round(it->second) : it->second;
    }
    out.has_incumbent = true;
    out.objective = model.evaluate_objective(out.x);
    out.best_bound = out.objective;
    out.status = status == "optimal" ? MilpStatus::Optimal : MilpStatus::GapLimit;
    return out;
}

}  // namespace h2bid
