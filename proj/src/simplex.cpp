#include "h2bid/simplex.hpp"

#include <algorithm>
#include <cmath>

namespace h2bid {

namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr int kRefactorEvery = 50;

bool finite(double v) { return std::isfinite(v); }

}  // namespace

std::vector<std::string> config_issues(const SolverConfig& config) {
    std::vector<std::string> out;
    if (!(config.gap_tol > 0.0)) out.push_back("gap_tol must be positive");
    if (!(config.int_tol > 0.0)) out.push_back("int_tol must be positive");
    if (!(config.feas_tol > 0.0)) out.push_back("feas_tol must be positive");
    if (config.node_limit < 1) out.push_back("node_limit must be positive");
    if (config.time_limit && !(*config.time_limit > 0.0)) out.push_back("time_limit must be positive");
    if (config.dive_every < 0) out.push_back("dive_every must not be negative");
    return out;
}

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "?";
}

// -- BasisFactor --------------------------------------------------------------

bool BasisFactor::factor(const Eigen::SparseMatrix<double>& basis_matrix) {
    etas_.clear();
    empty_ = basis_matrix.rows() == 0;
    if (empty_) return true;
    lu_.analyzePattern(basis_matrix);
    lu_.factorize(basis_matrix);
    return lu_.info() == Eigen::Success;
}

void BasisFactor::ftran(Eigen::VectorXd& v) const {
    if (empty_) return;
    Eigen::VectorXd solved = lu_.solve(v);
    v.swap(solved);
    for (const auto& eta : etas_) {
        const double xr = v[eta.row] / eta.pivot;
        v[eta.row] = xr;
        if (xr == 0.0) continue;
        for (const auto& [i, w] : eta.entries) v[i] -= w * xr;
    }
}

void BasisFactor::btran(Eigen::VectorXd& v) const {
    if (empty_) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double s = v[it->row];
        for (const auto& [i, w] : it->entries) s -= w * v[i];
        v[it->row] = s / it->pivot;
    }
    // SparseLU's transpose view is only reachable through a non-const handle.
    auto& lu = const_cast<Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>&>(lu_);
    Eigen::VectorXd solved = lu.transpose().solve(v);
    v.swap(solved);
}

void BasisFactor::push(const Eigen::VectorXd& column, int pivot_row) {
    Eta eta{pivot_row, column[pivot_row], {}};
    for (int i = 0; i < column.size(); ++i)
        if (i != pivot_row && column[i] != 0.0) eta.entries.emplace_back(i, column[i]);
    etas_.push_back(std::move(eta));
}

// -- SimplexEngine ------------------------------------------------------------

SimplexEngine::SimplexEngine(const MilpModel& model, SolverConfig config)
    : config_(std::move(config)), model_(&model) {
    n_ = model.num_vars();
    m_ = model.num_rows();
    cols_ = n_ + 2 * m_;

    std::vector<Eigen::Triplet<double>> triplets;
    b_.resize(m_);
    for (int i = 0; i < m_; ++i) {
        const auto& row = model.rows[i];
        for (const auto& t : row.terms) triplets.emplace_back(i, t.col, t.coef);
        b_[i] = row.rhs;
    }
    a_.resize(m_, n_);
    a_.setFromTriplets(triplets.begin(), triplets.end());
    a_.makeCompressed();

    cost_ = Eigen::VectorXd::Zero(cols_);
    cost_.head(n_) = -model.objective;
    lo_.resize(cols_);
    up_.resize(cols_);
    lo_.head(n_) = model.lower;
    up_.head(n_) = model.upper;
    for (int i = 0; i < m_; ++i) {
        const int s = n_ + i;
        switch (model.rows[i].relation) {
            case Relation::LessEqual: lo_[s] = 0.0; up_[s] = kInf; break;
            case Relation::GreaterEqual: lo_[s] = -kInf; up_[s] = 0.0; break;
            case Relation::Equal: lo_[s] = 0.0; up_[s] = 0.0; break;
        }
        lo_[n_ + m_ + i] = 0.0;
        up_[n_ + m_ + i] = 0.0;
    }
    x_ = Eigen::VectorXd::Zero(cols_);
    head_.assign(m_, -1);
    position_.assign(cols_, -1);
    state_.assign(cols_, State::AtLower);
    art_sign_.assign(m_, 1.0);
    const double cmax = model.objective.size() ? model.objective.cwiseAbs().maxCoeff() : 0.0;
    dual_tol_ = 1e-9 * std::max(1.0, cmax);
}

template <typename F>
void SimplexEngine::for_column(int j, F&& f) const {
    if (j < n_) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(a_, j); it; ++it) f(static_cast<int>(it.row()), it.value());
    } else if (j < n_ + m_) {
        f(j - n_, 1.0);
    } else {
        f(j - n_ - m_, art_sign_[j - n_ - m_]);
    }
}

double SimplexEngine::column_dot(const Eigen::VectorXd& y, int j) const {
    double s = 0.0;
    for_column(j, [&](int i, double v) { s += y[i] * v; });
    return s;
}

void SimplexEngine::column_dense(int j, Eigen::VectorXd& out) const {
    out.setZero(m_);
    for_column(j, [&](int i, double v) { out[i] = v; });
}

void SimplexEngine::set_nonbasic_value(int j) {
    switch (state_[j]) {
        case State::AtLower: x_[j] = lo_[j]; break;
        case State::AtUpper: x_[j] = up_[j]; break;
        case State::Free: x_[j] = 0.0; break;
        case State::Basic: break;
    }
}

void SimplexEngine::set_bounds(int col, double lo, double hi) {
    lo_[col] = lo;
    up_[col] = hi;
    if (state_[col] == State::Basic) return;
    if (state_[col] == State::AtLower && !finite(lo)) state_[col] = finite(hi) ? State::AtUpper : State::Free;
    if (state_[col] == State::AtUpper && !finite(hi)) state_[col] = finite(lo) ? State::AtLower : State::Free;
    set_nonbasic_value(col);
}

void SimplexEngine::refactor() {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(4 * m_);
    for (int i = 0; i < m_; ++i)
        for_column(head_[i], [&](int r, double v) { triplets.emplace_back(r, i, v); });
    Eigen::SparseMatrix<double> basis_matrix(m_, m_);
    basis_matrix.setFromTriplets(triplets.begin(), triplets.end());
    basis_matrix.makeCompressed();
    if (!factor_.factor(basis_matrix)) throw SolverError("singular basis");
}

void SimplexEngine::recompute_primal() {
    Eigen::VectorXd rhs = b_;
    for (int j = 0; j < cols_; ++j) {
        if (state_[j] == State::Basic || x_[j] == 0.0) continue;
        const double v = x_[j];
        for_column(j, [&](int i, double a) { rhs[i] -= a * v; });
    }
    factor_.ftran(rhs);
    for (int i = 0; i < m_; ++i) x_[head_[i]] = rhs[i];
}

void SimplexEngine::compute_duals(const Eigen::VectorXd& cost, Eigen::VectorXd& y) const {
    y.resize(m_);
    for (int i = 0; i < m_; ++i) y[i] = cost[head_[i]];
    factor_.btran(y);
}

double SimplexEngine::reduced_cost(const Eigen::VectorXd& cost, const Eigen::VectorXd& y, int j) const {
    return cost[j] - column_dot(y, j);
}

bool SimplexEngine::primal_feasible() const {
    for (int i = 0; i < m_; ++i) {
        const int j = head_[i];
        if (x_[j] < lo_[j] - kPrimalTol || x_[j] > up_[j] + kPrimalTol) return false;
    }
    return true;
}

void SimplexEngine::pivot(int entering, int position, const Eigen::VectorXd& w) {
    const int leaving = head_[position];
    position_[leaving] = -1;
    head_[position] = entering;
    position_[entering] = position;
    state_[entering] = State::Basic;
    factor_.push(w, position);
    if (factor_.updates() >= kRefactorEvery) {
        refactor();
        recompute_primal();
    }
}

void SimplexEngine::tick() {
    ++solve_iterations_;
    ++total_iterations_;
    if (!bland_ && solve_iterations_ > 5L * (m_ + n_)) bland_ = true;
    if (solve_iterations_ > 50L * (m_ + cols_) + 1000) throw SolverError("simplex stall");
}

SimplexEngine::Outcome SimplexEngine::primal_loop(const Eigen::VectorXd& cost) {
    Eigen::VectorXd y, w;
    for (;;) {
        tick();
        compute_duals(cost, y);

        int q = -1;
        double dq = 0.0;
        double best = 0.0;
        for (int j = 0; j < cols_; ++j) {
            const State st = state_[j];
            if (st == State::Basic || lo_[j] == up_[j]) continue;
            const double d = reduced_cost(cost, y, j);
            const bool eligible = (st == State::AtLower && d < -dual_tol_) ||
                                  (st == State::AtUpper && d > dual_tol_) ||
                                  (st == State::Free && std::abs(d) > dual_tol_);
            if (!eligible) continue;
            if (bland_) {
                q = j;
                dq = d;
                break;
            }
            if (std::abs(d) > best) {
                best = std::abs(d);
                q = j;
                dq = d;
            }
        }
        if (q < 0) return Outcome::Optimal;

        const double dir = dq < 0.0 ? 1.0 : -1.0;
        column_dense(q, w);
        factor_.ftran(w);

        const double flip = (finite(lo_[q]) && finite(up_[q])) ? up_[q] - lo_[q] : kInf;
        auto limit = [&](int i, double slack) {
            const double delta = -dir * w[i];
            const int j = head_[i];
            if (delta < 0.0 && finite(lo_[j])) return (x_[j] - lo_[j] + slack) / -delta;
            if (delta > 0.0 && finite(up_[j])) return (up_[j] - x_[j] + slack) / delta;
            return kInf;
        };

        int r = -1;
        double theta = kInf;
        if (bland_) {
            for (int i = 0; i < m_; ++i) {
                if (std::abs(w[i]) <= kPivotTol) continue;
                const double t = std::max(0.0, limit(i, 0.0));
                if (t == kInf) continue;
                if (t < theta || (t == theta && r >= 0 && head_[i] < head_[r])) {
                    theta = t;
                    r = i;
                }
            }
        } else {
            double theta1 = kInf;
            for (int i = 0; i < m_; ++i)
                if (std::abs(w[i]) > kPivotTol) theta1 = std::min(theta1, limit(i, kPrimalTol));
            double best_pivot = 0.0;
            for (int i = 0; i < m_; ++i) {
                if (std::abs(w[i]) <= kPivotTol) continue;
                const double t = std::max(0.0, limit(i, 0.0));
                if (t < kInf && t <= theta1 && std::abs(w[i]) > best_pivot) {
                    best_pivot = std::abs(w[i]);
                    theta = t;
                    r = i;
                }
            }
        }

        if (flip < kInf && flip <= theta) {
            x_[q] += dir * flip;
            for (int i = 0; i < m_; ++i) x_[head_[i]] -= dir * flip * w[i];
            state_[q] = state_[q] == State::AtLower ? State::AtUpper : State::AtLower;
            set_nonbasic_value(q);
            continue;
        }
        if (r < 0) return Outcome::Unbounded;

        const int leaving = head_[r];
        const bool to_lower = -dir * w[r] < 0.0;
        x_[q] += dir * theta;
        for (int i = 0; i < m_; ++i) x_[head_[i]] -= dir * theta * w[i];
        state_[leaving] = to_lower ? State::AtLower : State::AtUpper;
        set_nonbasic_value(leaving);
        pivot(q, r, w);
    }
}

bool SimplexEngine::make_dual_feasible() {
    Eigen::VectorXd y;
    compute_duals(cost_, y);
    bool changed = false;
    for (int j = 0; j < cols_; ++j) {
        const State st = state_[j];
        if (st == State::Basic || lo_[j] == up_[j]) continue;
        const double d = reduced_cost(cost_, y, j);
        if (st == State::AtLower && d < -dual_tol_) {
            if (!finite(up_[j])) return false;
            state_[j] = State::AtUpper;
        } else if (st == State::AtUpper && d > dual_tol_) {
            if (!finite(lo_[j])) return false;
            state_[j] = State::AtLower;
        } else if (st == State::Free && std::abs(d) > dual_tol_) {
            return false;
        } else {
            continue;
        }
        set_nonbasic_value(j);
        changed = true;
    }
    if (changed) recompute_primal();
    return true;
}

SimplexEngine::Outcome SimplexEngine::dual_loop() {
    Eigen::VectorXd y, rho, w;
    struct Candidate {
        int j;
        double alpha;
        double ratio;
    };
    std::vector<Candidate> candidates;
    for (;;) {
        tick();
        int r = -1;
        double worst = 0.0;
        for (int i = 0; i < m_; ++i) {
            const int j = head_[i];
            double v = 0.0;
            if (x_[j] < lo_[j] - kPrimalTol) v = lo_[j] - x_[j];
            else if (x_[j] > up_[j] + kPrimalTol) v = x_[j] - up_[j];
            if (v <= 0.0) continue;
            if (bland_) {
                if (r < 0 || j < head_[r]) r = i;
            } else if (v > worst) {
                worst = v;
                r = i;
            }
        }
        if (r < 0) return Outcome::Optimal;

        const int leaving = head_[r];
        const bool below = x_[leaving] < lo_[leaving];
        rho.setZero(m_);
        rho[r] = 1.0;
        factor_.btran(rho);
        compute_duals(cost_, y);

        candidates.clear();
        double theta1 = kInf;
        for (int j = 0; j < cols_; ++j) {
            const State st = state_[j];
            if (st == State::Basic || lo_[j] == up_[j]) continue;
            const double alpha = column_dot(rho, j);
            if (std::abs(alpha) <= kPivotTol) continue;
            const double d = reduced_cost(cost_, y, j);
            double slack;
            if (st == State::Free) {
                slack = std::abs(d);
            } else {
                const bool increases = st == State::AtLower;  // direction the nonbasic can move
                // x_r moves by -alpha * dx_j
                const bool helps = below ? (increases ? alpha < 0.0 : alpha > 0.0)
                                         : (increases ? alpha > 0.0 : alpha < 0.0);
                if (!helps) continue;
                slack = increases ? std::max(0.0, d) : std::max(0.0, -d);
            }
            const double ratio = slack / std::abs(alpha);
            candidates.push_back({j, alpha, ratio});
            theta1 = std::min(theta1, (slack + dual_tol_) / std::abs(alpha));
        }
        if (candidates.empty()) return Outcome::Infeasible;

        int q = -1;
        if (bland_) {
            double best = kInf;
            for (const auto& c : candidates)
                if (c.ratio < best) {
                    best = c.ratio;
                    q = c.j;
                }
        } else {
            double best_alpha = 0.0;
            for (const auto& c : candidates)
                if (c.ratio <= theta1 && std::abs(c.alpha) > best_alpha) {
                    best_alpha = std::abs(c.alpha);
                    q = c.j;
                }
        }

        column_dense(q, w);
        factor_.ftran(w);
        if (std::abs(w[r]) <= kPivotTol) {
            refactor();
            recompute_primal();
            continue;
        }
        const double target = below ? lo_[leaving] : up_[leaving];
        const double step = (x_[leaving] - target) / w[r];
        x_[q] += step;
        for (int i = 0; i < m_; ++i) x_[head_[i]] -= step * w[i];
        state_[leaving] = below ? State::AtLower : State::AtUpper;
        set_nonbasic_value(leaving);
        pivot(q, r, w);
    }
}

void SimplexEngine::start_cold() {
    for (int j = 0; j < n_; ++j) {
        position_[j] = -1;
        state_[j] = finite(lo_[j]) ? State::AtLower : (finite(up_[j]) ? State::AtUpper : State::Free);
        set_nonbasic_value(j);
    }
    Eigen::VectorXd r = b_;
    for (int j = 0; j < n_; ++j) {
        if (x_[j] == 0.0) continue;
        const double v = x_[j];
        for_column(j, [&](int i, double a) { r[i] -= a * v; });
    }
    for (int i = 0; i < m_; ++i) {
        const int s = n_ + i;
        const int a = n_ + m_ + i;
        position_[s] = position_[a] = -1;
        if (r[i] >= lo_[s] - kPrimalTol && r[i] <= up_[s] + kPrimalTol) {
            head_[i] = s;
            state_[s] = State::Basic;
            x_[s] = r[i];
            lo_[a] = up_[a] = 0.0;
            state_[a] = State::AtLower;
            x_[a] = 0.0;
            art_sign_[i] = 1.0;
        } else {
            const double v = r[i] < lo_[s] ? lo_[s] : up_[s];
            state_[s] = r[i] < lo_[s] ? State::AtLower : State::AtUpper;
            x_[s] = v;
            art_sign_[i] = r[i] - v >= 0.0 ? 1.0 : -1.0;
            lo_[a] = 0.0;
            up_[a] = kInf;
            head_[i] = a;
            state_[a] = State::Basic;
            x_[a] = std::abs(r[i] - v);
        }
        position_[head_[i]] = i;
    }
    refactor();
    has_basis_ = true;
}

void SimplexEngine::drive_out_artificials() {
    Eigen::VectorXd rho, w;
    for (int i = 0; i < m_; ++i) {
        if (head_[i] < n_ + m_) continue;
        rho.setZero(m_);
        rho[i] = 1.0;
        factor_.btran(rho);
        int q = -1;
        double best = 1e-7;
        for (int j = 0; j < n_ + m_; ++j) {
            if (state_[j] == State::Basic) continue;
            const double alpha = std::abs(column_dot(rho, j));
            if (alpha > best) {
                best = alpha;
                q = j;
            }
        }
        if (q < 0) continue;  // redundant row, the artificial stays basic at zero
        column_dense(q, w);
        factor_.ftran(w);
        const int leaving = head_[i];
        state_[leaving] = State::AtLower;
        x_[leaving] = 0.0;
        pivot(q, i, w);
    }
    recompute_primal();
}

LpSolution SimplexEngine::solve() {
    const long before = total_iterations_;
    solve_iterations_ = 0;
    bland_ = false;
    start_cold();

    bool used_artificials = false;
    for (int i = 0; i < m_; ++i) used_artificials |= head_[i] >= n_ + m_;
    if (used_artificials) {
        Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols_);
        phase1.tail(m_).setOnes();
        primal_loop(phase1);
        double infeasibility = 0.0;
        for (int i = 0; i < m_; ++i) infeasibility += x_[n_ + m_ + i];
        const double scale = std::max(1.0, b_.size() ? b_.cwiseAbs().maxCoeff() : 0.0);
        for (int i = 0; i < m_; ++i) {
            const int a = n_ + m_ + i;
            lo_[a] = up_[a] = 0.0;
            if (state_[a] != State::Basic) {
                state_[a] = State::AtLower;
                x_[a] = 0.0;
            }
        }
        if (infeasibility > 1e-9 * scale) return finish(Outcome::Infeasible, before);
        drive_out_artificials();
    }
    bland_ = false;
    return finish(primal_loop(cost_), before);
}

LpSolution SimplexEngine::resolve() {
    if (!has_basis_) return solve();
    const long before = total_iterations_;
    solve_iterations_ = 0;
    bland_ = false;
    try {
        refactor();
        recompute_primal();
        if (!primal_feasible()) {
            if (!make_dual_feasible()) return solve();
            const Outcome dual = dual_loop();
            if (dual == Outcome::Infeasible) return finish(Outcome::Infeasible, before);
            bland_ = false;
        }
        return finish(primal_loop(cost_), before);
    } catch (const SolverError&) {
        return solve();
    }
}

void SimplexEngine::load_basis(const Basis& basis) {
    head_ = basis.head;
    state_ = basis.state;
    art_sign_ = basis.artificial_sign;
    std::fill(position_.begin(), position_.end(), -1);
    for (int i = 0; i < m_; ++i) position_[head_[i]] = i;
    for (int j = 0; j < cols_; ++j) {
        if (state_[j] == State::Basic) continue;
        if (state_[j] == State::AtLower && !finite(lo_[j])) state_[j] = finite(up_[j]) ? State::AtUpper : State::Free;
        if (state_[j] == State::AtUpper && !finite(up_[j])) state_[j] = finite(lo_[j]) ? State::AtLower : State::Free;
        set_nonbasic_value(j);
    }
    has_basis_ = true;
}

Basis SimplexEngine::basis() const { return {head_, state_, art_sign_}; }

LpSolution SimplexEngine::finish(Outcome outcome, long iterations_before) {
    LpSolution sol;
    sol.iterations = total_iterations_ - iterations_before;
    sol.basis = basis();
    sol.x = x_.head(n_);
    switch (outcome) {
        case Outcome::Optimal: sol.status = LpStatus::Optimal; break;
        case Outcome::Unbounded: sol.status = LpStatus::Unbounded; break;
        case Outcome::Infeasible: sol.status = LpStatus::Infeasible; break;
        case Outcome::Stalled:
        case Outcome::NotDualFeasible: throw SolverError("simplex stall");
    }
    if (sol.status != LpStatus::Optimal) return sol;

    // basic values may sit a hair outside their bounds after Harris steps
    for (int j = 0; j < n_; ++j) sol.x[j] = std::clamp(sol.x[j], lo_[j], up_[j]);
    sol.objective = model_->objective.dot(sol.x);

    Eigen::VectorXd y;
    compute_duals(cost_, y);
    sol.duals = -y;
    double worst = 0.0;
    for (int j = 0; j < cols_; ++j) {
        const State st = state_[j];
        if (st == State::Basic || lo_[j] == up_[j]) continue;
        const double d = reduced_cost(cost_, y, j);
        if (st == State::AtLower) worst = std::max(worst, -d);
        else if (st == State::AtUpper) worst = std::max(worst, d);
        else worst = std::max(worst, std::abs(d));
    }
    sol.max_dual_infeasibility = worst;
    return sol;
}

LpSolution solve_lp(const MilpModel& model, const SolverConfig& config) {
    SimplexEngine engine(model, config);
    return engine.solve();
}

}  // namespace h2bid
