#include "h2bid/expost.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace h2bid {

const char* to_string(Variation v) {
    switch (v) {
        case Variation::NoAS: return "noas";
        case Variation::Oracle: return "oracle";
        case Variation::AlphaZero: return "a0";
        case Variation::AlphaOne: return "a1";
    }
    return "?";
}

Variation parse_variation(const std::string& text) {
    std::string s = text;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "noas") return Variation::NoAS;
    if (s == "oracle") return Variation::Oracle;
    if (s == "a0" || s == "alphazero") return Variation::AlphaZero;
    if (s == "a1" || s == "alphaone") return Variation::AlphaOne;
    throw std::invalid_argument("unknown variation '" + text + "'");
}

RealizedDay quiet_day(const DayInstance& inst) {
    const int T = inst.hours();
    RealizedDay day;
    day.label = inst.label;
    day.balancing_prices = Eigen::VectorXd::Zero(T);
    day.system_short = Mask::Constant(T, false);
    day.da_prices = inst.da_prices;
    day.fcr_prices = inst.fcr_prices;
    day.mfrr_up_prices = inst.mfrr_up_prices;
    day.mfrr_dn_prices = inst.mfrr_dn_prices;
    day.activated_dn = Mask::Constant(T, false);
    return day;
}

std::vector<std::string> realized_issues(const RealizedDay& day, int hours, int blocks) {
    std::vector<std::string> issues;
    auto len = [&](const char* what, Eigen::Index n, int want) {
        if (n != want) {
            std::ostringstream msg;
            msg << "realized series length: " << what << " has " << n << ", expected " << want;
            issues.push_back(msg.str());
        }
    };
    len("balancing_prices", day.balancing_prices.size(), hours);
    len("system_short", day.system_short.size(), hours);
    len("da_prices", day.da_prices.size(), hours);
    len("fcr_prices", day.fcr_prices.size(), blocks);
    len("mfrr_up_prices", day.mfrr_up_prices.size(), hours);
    len("mfrr_dn_prices", day.mfrr_dn_prices.size(), hours);
    len("activated_dn", day.activated_dn.size(), hours);
    if (!day.balancing_prices.allFinite()) issues.push_back("balancing prices not finite");
    return issues;
}

Mask realized_activation(const ElectrolyzerSpec& spec, const HydrogenContract& contract, const RealizedDay& day) {
    const double regulation_bid = spec.mean_efficiency * contract.price;
    return (day.balancing_prices.array() >= regulation_bid) && day.system_short;
}

namespace {

// Largest amount of hourly production that fits the trailers, solved as a
// small LP: hour t may feed any connected trailer up to the dispenser rate.
Eigen::MatrixXd replay_trailers(const DayInstance& inst, const Eigen::VectorXd& hydrogen) {
    const int T = inst.hours();
    const auto& trailers = inst.contract.trailers;
    const int D = static_cast<int>(trailers.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(T, D);
    if (D == 0) return out;

    // Everything fits: no need for the LP, and the split is then exact.
    bool trivially_fits = true;
    {
        Eigen::VectorXd remaining(D);
        for (int d = 0; d < D; ++d) remaining[d] = trailers[d].capacity;
        for (int t = 0; t < T && trivially_fits; ++t) {
            double left = hydrogen[t];
            for (int d = 0; d < D && left > 0.0; ++d) {
                if (!trailers[d].available[t]) continue;
                const double put = std::min({left, inst.contract.dispenser_capacity, remaining[d]});
                out(t, d) = put;
                remaining[d] -= put;
                left -= put;
            }
            trivially_fits = left <= 0.0;
        }
    }
    if (trivially_fits) return out;

    MilpModel lp(T * D);
    auto col = [D](int t, int d) { return t * D + d; };
    for (int t = 0; t < T; ++t) {
        std::vector<Term> hour;
        for (int d = 0; d < D; ++d) {
            const double cap = trailers[d].available[t] ? inst.contract.dispenser_capacity : 0.0;
            lp.set_column(col(t, d), 0.0, cap, 1.0);
            hour.push_back({col(t, d), 1.0});
        }
        lp.add_row(std::move(hour), Relation::LessEqual, hydrogen[t]);
    }
    for (int d = 0; d < D; ++d) {
        std::vector<Term> fill;
        for (int t = 0; t < T; ++t) fill.push_back({col(t, d), 1.0});
        lp.add_row(std::move(fill), Relation::LessEqual, trailers[d].capacity);
    }

    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal) throw SolverError("trailer replay LP failed");
    for (int t = 0; t < T; ++t)
        for (int d = 0; d < D; ++d) out(t, d) = std::max(0.0, sol.x[col(t, d)]);
    return out;
}

}  // namespace

double sum_in_order(const Eigen::VectorXd& v) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) total += v[i];
    return total;
}

Redispatch redispatch(const BidSchedule& bids, const DayInstance& inst, const Mask& activated_up,
                      const Mask& activated_dn) {
    const int T = inst.hours();
    if (bids.hours() != T || activated_up.size() != T || activated_dn.size() != T)
        throw ContractViolation("redispatch: series length mismatch");
    if (auto issues = schedule_issues(bids, inst); !issues.empty())
        throw ContractViolation("bid schedule invariant: " + issues.front());

    const auto& spec = inst.spec;
    const double dt = inst.market.time_step;
    constexpr double tol = 1e-9;

    Redispatch out;
    out.consumption = Eigen::VectorXd::Zero(T);
    out.hydrogen = Eigen::VectorXd::Zero(T);
    for (int t = 0; t < T; ++t) {
        const bool standby = bids.states[t] == OperatingState::Standby;
        const double base_draw = standby ? spec.standby_power : 0.0;
        if (!activated_up[t] && !activated_dn[t]) {
            out.consumption[t] = bids.p_tot[t] + base_draw;
            out.hydrogen[t] = bids.h_sched[t];
            continue;
        }
        double power = bids.p_tot[t];
        if (activated_up[t]) power -= bids.p_mfrr_up[t];
        if (activated_dn[t]) power += bids.p_mfrr_dn[t];
        if (power <= tol) {
            out.consumption[t] = base_draw;
            continue;
        }
        if (power < spec.curve.min_power() - tol) {
            ++out.physical_violation_hours;
            out.consumption[t] = spec.standby_power;
            continue;
        }
        if (power > spec.curve.max_power() + tol) {
            ++out.physical_violation_hours;
            power = spec.curve.max_power();
        }
        power = std::clamp(power, spec.curve.min_power(), spec.curve.max_power());
        out.consumption[t] = power;
        out.hydrogen[t] = evaluate_curve(spec.curve, power) * dt;
    }

    out.dispensed = replay_trailers(inst, out.hydrogen);
    out.trailer_end = out.dispensed.colwise().sum().transpose();
    out.overflow_kg = std::max(0.0, sum_in_order(out.hydrogen) - out.dispensed.sum());
    return out;
}

ExPostResult settle(const BidSchedule& bids, const DayInstance& inst, const RealizedDay& day,
                    const Mask& activated_up, Redispatch realized) {
    const int T = inst.hours();
    if (auto issues = realized_issues(day, T, inst.market.num_blocks()); !issues.empty())
        throw ContractViolation(issues.front());

    ExPostResult r;
    r.label = day.label.empty() ? inst.label : day.label;
    r.bids = bids;
    r.activated_up = activated_up;

    ProfitBreakdown& b = r.breakdown;
    b.hydrogen = inst.contract.price * sum_in_order(realized.hydrogen);
    b.fcr = inst.market.fcr_block_hours * day.fcr_prices.dot(bids.p_fcr);
    b.mfrr = day.mfrr_up_prices.dot(bids.p_mfrr_up) + day.mfrr_dn_prices.dot(bids.p_mfrr_dn);
    b.da_cost = day.da_prices.dot(bids.p_da);
    for (int t = 0; t < T; ++t) {
        double energy = 0.0;
        if (activated_up[t]) energy += bids.p_mfrr_up[t];
        if (day.activated_dn[t]) energy -= bids.p_mfrr_dn[t];
        b.activation += energy * inst.market.time_step * day.balancing_prices[t];
        if (activated_up[t] && bids.p_mfrr_up[t] > 0.0) ++r.activated_hours;
    }
    r.profit = b.total();
    r.unmet_demand_kg = std::max(0.0, inst.contract.min_daily_demand - sum_in_order(realized.hydrogen));
    r.realized = std::move(realized);
    return r;
}

DayFailure::DayFailure(const std::string& label_, Variation v, MilpStatus status_)
    : std::runtime_error("day " + label_ + " (" + to_string(v) + "): solver returned " + to_string(status_)),
      label(label_),
      variation(v),
      status(status_) {}

void apply_variation(Variation v, DayInstance& inst, const RealizedDay& day, const Mask& activated_up) {
    const int T = inst.hours();
    switch (v) {
        case Variation::NoAS:
        case Variation::AlphaZero:
            inst.alpha_up = Eigen::VectorXd::Zero(T);
            inst.alpha_dn = Eigen::VectorXd::Zero(T);
            break;
        case Variation::AlphaOne:
            inst.alpha_up = Eigen::VectorXd::Ones(T);
            inst.alpha_dn = Eigen::VectorXd::Ones(T);
            break;
        case Variation::Oracle:
            inst.alpha_up = activated_up.cast<double>().matrix();
            inst.alpha_dn = day.activated_dn.cast<double>().matrix();
            break;
    }
}

PreparedDay prepare_variation(Variation v, const DayInstance& inst_template, const RealizedDay& day,
                              const ModelOptions& options) {
    PreparedDay p;
    p.instance = inst_template;
    p.activated_up = realized_activation(p.instance.spec, p.instance.contract, day);
    apply_variation(v, p.instance, day, p.activated_up);
    p.model = build_model(p.instance, options);
    if (v == Variation::NoAS) disable_reserves(p.model);
    return p;
}

ExPostResult run_variation(Variation v, const DayInstance& inst_template, const RealizedDay& day,
                           const SolverConfig& config, const ModelOptions& options,
                           const std::function<void(const PreparedDay&)>& before_solve) {
    PreparedDay p = prepare_variation(v, inst_template, day, options);
    if (before_solve) before_solve(p);
    MilpSolution sol = solve_milp(p.model.milp, config);
    if (sol.status != MilpStatus::Optimal) throw DayFailure(p.instance.label, v, sol.status);

    BidSchedule bids = extract_bids(p.model, p.instance, sol.x);
    Redispatch realized = redispatch(bids, p.instance, p.activated_up, day.activated_dn);
    ExPostResult r = settle(bids, p.instance, day, p.activated_up, std::move(realized));
    r.variation = v;
    r.day_ahead_objective = sol.objective;
    r.solution = std::move(sol);
    return r;
}

}  // namespace h2bid
