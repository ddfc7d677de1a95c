#include "h2bid/branch_and_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <ostream>
#include <queue>

namespace h2bid {

const char* to_string(MilpStatus status) {
    switch (status) {
        case MilpStatus::Optimal: return "optimal";
        case MilpStatus::Infeasible: return "infeasible";
        case MilpStatus::Unbounded: return "unbounded";
        case MilpStatus::GapLimit: return "gap_limit";
        case MilpStatus::NodeLimit: return "node_limit";
    }
    return "?";
}

double MilpSolution::relative_gap() const {
    if (!has_incumbent) return kInf;
    return (best_bound - objective) / std::max(1.0, std::abs(objective));
}

namespace {

struct OpenNode {
    double bound;       // relaxation value of the parent
    double path_bound;  // smallest relaxation value on the path from the root
    long id;
    int depth;
    std::vector<std::int8_t> fixing;  // per binary: -1 free, else fixed value
    std::shared_ptr<const Basis> basis;
    int branch_var;    // binary index fixed last, for pseudocost updates
    double branch_dist;
};

struct OpenOrder {
    bool operator()(const OpenNode& a, const OpenNode& b) const {
        if (a.bound != b.bound) return a.bound < b.bound;
        return a.id < b.id;  // most recent first on ties
    }
};

class Search {
public:
    Search(const MilpModel& model, const SolverConfig& config)
        : model_(model), config_(config), engine_(model, config) {
        for (int j = 0; j < model.num_vars(); ++j)
            if (model.binary[j]) binaries_.push_back(j);
        binary_pos_.assign(model.num_vars(), -1);
        for (std::size_t k = 0; k < binaries_.size(); ++k) binary_pos_[binaries_[k]] = static_cast<int>(k);
        column_rows_.resize(model.num_vars());
        for (int r = 0; r < model.num_rows(); ++r)
            for (const Term& t : model.rows[r].terms) column_rows_[t.col].push_back({r, t.coef});
    }

    MilpSolution run();

private:
    void apply(int k, std::int8_t value) {
        const int col = binaries_[k];
        if (value < 0) engine_.set_bounds(col, model_.lower[col], model_.upper[col]);
        else engine_.set_bounds(col, value, value);
    }
    void apply_all(const std::vector<std::int8_t>& fixing) {
        for (std::size_t k = 0; k < binaries_.size(); ++k) apply(static_cast<int>(k), fixing[k]);
    }
    int pick_branch(const Eigen::VectorXd& x) const;
    void record_pseudocost(int k, int dir, double dist, double degradation);
    double pseudocost(int k, int dir) const;
    void try_incumbent(const Eigen::VectorXd& x, double path_bound);
    bool round_with_locks(const Eigen::VectorXd& x, Eigen::VectorXd& candidate) const;
    void dive(const Eigen::VectorXd& x, double path_bound, std::vector<std::int8_t> fixing);
    void node_heuristic(const Eigen::VectorXd& x, double path_bound, const std::vector<std::int8_t>& fixing);
    void offer(Eigen::VectorXd candidate, double path_bound);
    double prune_slack() const { return config_.gap_tol * std::max(1.0, std::abs(incumbent_)); }
    bool elapsed_out() const;

    const MilpModel& model_;
    const SolverConfig& config_;
    SimplexEngine engine_;
    std::vector<int> binaries_;
    std::vector<int> binary_pos_;  // column -> index in binaries_, or -1
    std::vector<std::vector<Term>> column_rows_;  // (row, coef) per column
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();

    bool has_incumbent_ = false;
    double incumbent_ = -kInf;
    Eigen::VectorXd incumbent_x_;
    double pruned_bound_ = -kInf;
    long bound_violations_ = 0;
    long heuristic_calls_ = 0;

    // per binary and direction (0 down, 1 up): summed degradation per unit, count
    std::vector<double> pc_sum_[2];
    std::vector<int> pc_count_[2];
    double pc_total_[2] = {0.0, 0.0};
    int pc_total_count_[2] = {0, 0};
};

void Search::record_pseudocost(int k, int dir, double dist, double degradation) {
    if (k < 0 || dist <= 0.0) return;
    if (pc_sum_[0].empty())
        for (int d = 0; d < 2; ++d) {
            pc_sum_[d].assign(binaries_.size(), 0.0);
            pc_count_[d].assign(binaries_.size(), 0);
        }
    const double unit = std::max(0.0, degradation) / dist;
    pc_sum_[dir][k] += unit;
    ++pc_count_[dir][k];
    pc_total_[dir] += unit;
    ++pc_total_count_[dir];
}

double Search::pseudocost(int k, int dir) const {
    if (!pc_sum_[dir].empty() && pc_count_[dir][k] > 0) return pc_sum_[dir][k] / pc_count_[dir][k];
    if (pc_total_count_[dir] > 0) return pc_total_[dir] / pc_total_count_[dir];
    return 1.0;
}

bool Search::elapsed_out() const {
    if (!config_.time_limit) return false;
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
    return dt.count() > *config_.time_limit;
}

int Search::pick_branch(const Eigen::VectorXd& x) const {
    int best = -1;
    double best_score = 0.0;
    for (std::size_t k = 0; k < binaries_.size(); ++k) {
        const double v = x[binaries_[k]];
        const double frac = std::abs(v - std::round(v));
        if (frac <= config_.int_tol) continue;
        if (config_.branching == BranchRule::FirstFractional) return static_cast<int>(k);
        if (config_.branching == BranchRule::PseudoCost) {
            const double f = v - std::floor(v);
            constexpr double eps = 1e-6;
            const double score = std::max(eps, f * pseudocost(static_cast<int>(k), 0)) *
                                 std::max(eps, (1.0 - f) * pseudocost(static_cast<int>(k), 1));
            if (score > best_score) {
                best_score = score;
                best = static_cast<int>(k);
            }
            continue;
        }
        if (frac > best_score) {
            best_score = frac;
            best = static_cast<int>(k);
        }
    }
    return best;
}

// Rounds every fractional binary in a direction that keeps all of its rows
// satisfied with the other values held. Returns false when some binary has
// no such direction; it is then rounded to nearest and the result is only a
// starting point for a fix-and-resolve.
bool Search::round_with_locks(const Eigen::VectorXd& x, Eigen::VectorXd& candidate) const {
    Eigen::VectorXd activity(model_.num_rows());
    for (int r = 0; r < model_.num_rows(); ++r) {
        double a = 0.0;
        for (const Term& t : model_.rows[r].terms) a += t.coef * x[t.col];
        activity[r] = a;
    }
    auto fits = [&](int r, double a) {
        const LinearRow& row = model_.rows[r];
        const double tol = config_.feas_tol * 0.5;
        switch (row.relation) {
            case Relation::LessEqual: return a <= row.rhs + tol;
            case Relation::GreaterEqual: return a >= row.rhs - tol;
            case Relation::Equal: return std::abs(a - row.rhs) <= tol;
        }
        return false;
    };
    candidate = x;
    bool all_placed = true;
    for (int col : binaries_) {
        const double v = x[col];
        const double nearest = std::round(v);
        if (std::abs(v - nearest) <= config_.int_tol) {
            candidate[col] = nearest;
            continue;
        }
        double chosen = -1.0;
        for (double target : {nearest, 1.0 - nearest}) {
            if (target < engine_.lower(col) || target > engine_.upper(col)) continue;
            const double delta = target - v;
            bool ok = true;
            for (const Term& t : column_rows_[col])
                if (!fits(t.col, activity[t.col] + t.coef * delta)) {
                    ok = false;
                    break;
                }
            if (ok) {
                chosen = target;
                break;
            }
        }
        if (chosen < 0.0) {
            all_placed = false;
            chosen = nearest;
        }
        for (const Term& t : column_rows_[col]) activity[t.col] += t.coef * (chosen - v);
        candidate[col] = chosen;
    }
    return all_placed;
}

void Search::offer(Eigen::VectorXd candidate, double path_bound) {
    for (int col : binaries_) candidate[col] = std::round(candidate[col]);
    if (model_.max_row_violation(candidate) > config_.feas_tol) return;
    if (model_.max_bound_violation(candidate) > 1e-9) return;
    const double value = model_.evaluate_objective(candidate);
    if (value > path_bound + prune_slack()) ++bound_violations_;
    if (!has_incumbent_ || value > incumbent_) {
        has_incumbent_ = true;
        incumbent_ = value;
        incumbent_x_ = std::move(candidate);
    }
}

void Search::node_heuristic(const Eigen::VectorXd& x, double path_bound,
                            const std::vector<std::int8_t>& fixing) {
    Eigen::VectorXd candidate;
    if (round_with_locks(x, candidate)) {
        offer(std::move(candidate), path_bound);
        return;
    }
    if (config_.dive_every <= 0 || heuristic_calls_++ % config_.dive_every != 0) return;
    const Basis snapshot = engine_.basis();
    dive(x, path_bound, fixing);
    apply_all(fixing);
    engine_.load_basis(snapshot);
}

// Fixes every selection group after the value of its expression, then dives
// on the binaries still fractional, nearest first. Leaves the engine bounds
// modified.
void Search::dive(const Eigen::VectorXd& x, double path_bound, std::vector<std::int8_t> fixing) {
    for (const SelectionGroup& g : model_.selection_groups) {
        double e = 0.0;
        for (const Term& t : g.expression) e += t.coef * x[t.col];
        int pick = -1;
        double best = std::abs(e);  // distance to choosing none
        double best_z = -1.0;
        for (std::size_t m = 0; m < g.members.size(); ++m) {
            const double dist = std::max({0.0, g.lo[m] - e, e - g.hi[m]});
            const double z = x[g.members[m]];
            if (dist < best - 1e-9 || (dist <= best + 1e-9 && pick >= 0 && z > best_z)) {
                best = dist;
                best_z = z;
                pick = static_cast<int>(m);
            }
        }
        bool conflict = false;
        for (std::size_t m = 0; m < g.members.size(); ++m) {
            const int k = binary_pos_[g.members[m]];
            const std::int8_t want = static_cast<int>(m) == pick;
            if (k < 0 || (fixing[k] >= 0 && fixing[k] != want)) conflict = true;
        }
        if (conflict) continue;
        for (std::size_t m = 0; m < g.members.size(); ++m)
            fixing[binary_pos_[g.members[m]]] = static_cast<int>(m) == pick;
    }
    apply_all(fixing);
    for (std::size_t step = 0; step <= binaries_.size(); ++step) {
        const LpSolution lp = engine_.resolve();
        if (lp.status != LpStatus::Optimal) return;
        if (has_incumbent_ && lp.objective <= incumbent_ + prune_slack()) return;
        int chosen = -1;
        double chosen_frac = 1.0;
        for (std::size_t k = 0; k < binaries_.size(); ++k) {
            const double v = lp.x[binaries_[k]];
            const double frac = std::abs(v - std::round(v));
            if (frac > config_.int_tol && frac < chosen_frac) {
                chosen_frac = frac;
                chosen = static_cast<int>(k);
            }
        }
        Eigen::VectorXd candidate;
        if (chosen < 0 || round_with_locks(lp.x, candidate)) {
            offer(chosen < 0 ? lp.x : candidate, path_bound);
            return;
        }
        const auto value = static_cast<std::int8_t>(std::lround(lp.x[binaries_[chosen]]));
        fixing[chosen] = value;
        apply(chosen, value);
    }
}

void Search::try_incumbent(const Eigen::VectorXd& x, double path_bound) {
    // Fix the binaries at their rounded values and re-solve so the continuous
    // part is consistent with exact 0/1 values.
    for (std::size_t k = 0; k < binaries_.size(); ++k)
        apply(static_cast<int>(k), static_cast<std::int8_t>(std::lround(x[binaries_[k]])));
    const LpSolution fixed = engine_.resolve();
    if (fixed.status != LpStatus::Optimal) return;
    offer(fixed.x, path_bound);
}

MilpSolution Search::run() {
    MilpSolution out;
    std::priority_queue<OpenNode, std::vector<OpenNode>, OpenOrder> open;
    long next_id = 1;

    std::vector<std::int8_t> fixing(binaries_.size(), -1);
    double parent_bound = kInf;
    double path_bound = kInf;
    int depth = 0;
    bool root = true;
    int branch_var = -1;
    int branch_dir = 0;
    double branch_dist = 0.0;
    MilpStatus status = MilpStatus::Optimal;
    long nodes = 0;

    for (;;) {
        bool descend = false;
        if (nodes >= config_.node_limit) {
            status = MilpStatus::NodeLimit;
            break;
        }
        if (elapsed_out()) {
            status = MilpStatus::GapLimit;
            break;
        }
        ++nodes;
        const LpSolution lp = root ? engine_.solve() : engine_.resolve();

        if (lp.status == LpStatus::Unbounded) {
            if (root) {
                out.status = MilpStatus::Unbounded;
                out.nodes = nodes;
                out.lp_iterations = engine_.total_iterations();
                return out;
            }
        }
        root = false;

        if (lp.status == LpStatus::Optimal) {
            const double bound = lp.objective;
            if (branch_var >= 0) record_pseudocost(branch_var, branch_dir, branch_dist, parent_bound - bound);
            if (bound > parent_bound + prune_slack() + 1e-9 * std::abs(parent_bound)) ++bound_violations_;
            const double node_path = std::min(path_bound, bound);
            if (config_.node_log)
                *config_.node_log << "node=" << nodes << " depth=" << depth << " bound=" << bound
                                  << " incumbent=" << (has_incumbent_ ? incumbent_ : -kInf) << '\n';
            if (has_incumbent_ && bound <= incumbent_ + prune_slack()) {
                pruned_bound_ = std::max(pruned_bound_, bound);
            } else {
                int k = pick_branch(lp.x);
                if (k >= 0) {
                    node_heuristic(lp.x, node_path, fixing);
                    if (has_incumbent_ && bound <= incumbent_ + prune_slack()) k = -2;
                }
                if (k == -2) {
                    pruned_bound_ = std::max(pruned_bound_, bound);
                } else if (k < 0) {
                    try_incumbent(lp.x, node_path);
                } else {
                    const double v = lp.x[binaries_[k]];
                    const std::int8_t first =
                        config_.child_order == ChildOrder::Nearest && v < 0.5 ? std::int8_t{0} : std::int8_t{1};
                    const std::int8_t second = 1 - first;
                    auto snapshot = std::make_shared<const Basis>(engine_.basis());
                    auto other = fixing;
                    other[k] = second;
                    open.push({bound, node_path, next_id++, depth + 1, std::move(other), std::move(snapshot), k,
                               second ? 1.0 - v : v});
                    fixing[k] = first;
                    apply(k, first);
                    branch_var = k;
                    branch_dir = first;
                    branch_dist = first ? 1.0 - v : v;
                    parent_bound = bound;
                    path_bound = node_path;
                    ++depth;
                    descend = true;
                }
            }
        }
        if (descend) continue;

        // back up to the best open node
        bool resumed = false;
        while (!open.empty()) {
            OpenNode node = open.top();
            open.pop();
            if (has_incumbent_ && node.bound <= incumbent_ + prune_slack()) {
                pruned_bound_ = std::max(pruned_bound_, node.bound);
                continue;
            }
            fixing = std::move(node.fixing);
            apply_all(fixing);
            engine_.load_basis(*node.basis);
            parent_bound = node.bound;
            path_bound = node.path_bound;
            branch_var = node.branch_var;
            branch_dir = fixing[node.branch_var];
            branch_dist = node.branch_dist;
            depth = node.depth;
            resumed = true;
            break;
        }
        if (!resumed) break;
    }

    double bound = has_incumbent_ ? std::max(incumbent_, pruned_bound_) : pruned_bound_;
    if (status != MilpStatus::Optimal) {
        bound = std::max(bound, parent_bound);
        while (!open.empty()) {
            bound = std::max(bound, open.top().bound);
            open.pop();
        }
    }

    out.nodes = nodes;
    out.lp_iterations = engine_.total_iterations();
    out.bound_violations = bound_violations_;
    out.has_incumbent = has_incumbent_;
    if (has_incumbent_) {
        out.objective = incumbent_;
        out.x = incumbent_x_;
    }
    out.best_bound = bound;
    if (status == MilpStatus::Optimal && !has_incumbent_) status = MilpStatus::Infeasible;
    out.status = status;
    return out;
}

}  // namespace

MilpSolution solve_milp(const MilpModel& model, const SolverConfig& config) {
    if (auto issues = config_issues(config); !issues.empty()) throw SolverError("bad solver config: " + issues.front());
    if (auto issues = model.structural_issues(); !issues.empty()) throw SolverError("malformed model: " + issues.front());
    const auto start = std::chrono::steady_clock::now();
    Search search(model, config);
    MilpSolution out = search.run();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    out.seconds = dt.count();
    return out;
}

}  // namespace h2bid
