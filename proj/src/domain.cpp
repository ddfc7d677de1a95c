#include "h2bid/domain.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace h2bid {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::ostringstream out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out << "; ";
        out << items[i];
    }
    return out.str();
}

template <typename... Args>
std::string cat(Args&&... args) {
    std::ostringstream out;
    (out << ... << args);
    return out.str();
}

void append(std::vector<std::string>& into, std::vector<std::string> more) {
    into.insert(into.end(), std::make_move_iterator(more.begin()),
                std::make_move_iterator(more.end()));
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

InvalidInstance::InvalidInstance(std::vector<std::string> issues)
    : std::runtime_error("invalid instance: " + join(issues)), issues_(std::move(issues)) {}

const char* to_string(OperatingState state) {
    switch (state) {
        case OperatingState::Online: return "online";
        case OperatingState::Standby: return "standby";
        case OperatingState::Off: return "off";
    }
    return "?";
}

double ProductionCurve::max_rate() const {
    double best = 0.0;
    for (const auto& s : segments) best = std::max({best, s.rate(s.p_min), s.rate(s.p_max)});
    return best;
}

int segment_of(const ProductionCurve& curve, double p, double tol) {
    if (curve.segments.empty()) throw DomainError("empty production curve");
    if (p < -tol) throw DomainError(cat("negative power ", p));
    if (p <= tol) return -1;
    if (p < curve.min_power() - tol) throw DomainError(cat("power ", p, " MW below minimum load"));
    if (p > curve.max_power() + tol) throw DomainError(cat("power ", p, " MW above capacity"));
    for (int s = 0; s < curve.size(); ++s) {
        if (p <= curve.segments[s].p_max) return s;
    }
    return curve.size() - 1;
}

double evaluate_curve(const ProductionCurve& curve, double p, double tol) {
    const int s = segment_of(curve, p, tol);
    if (s < 0) return 0.0;
    const auto& seg = curve.segments[s];
    return seg.rate(std::clamp(p, seg.p_min, seg.p_max));
}

std::vector<std::string> curve_issues(const ProductionCurve& curve) {
    std::vector<std::string> out;
    if (curve.segments.empty()) {
        out.push_back("production curve has no segments");
        return out;
    }
    for (int s = 0; s < curve.size(); ++s) {
        const auto& seg = curve.segments[s];
        if (!(seg.p_min < seg.p_max)) out.push_back(cat("segment ", s, ": p_min must be below p_max"));
        if (!(seg.slope > 0.0)) out.push_back(cat("segment ", s, ": slope must be positive"));
        if (seg.rate(seg.p_min) < 0.0 || seg.rate(seg.p_max) < 0.0)
            out.push_back(cat("segment ", s, ": negative hydrogen output"));
        if (s + 1 < curve.size()) {
            const auto& next = curve.segments[s + 1];
            if (seg.p_max != next.p_min)
                out.push_back(cat("segments ", s, "/", s + 1, ": not contiguous"));
            const double b = seg.p_max;
            if (std::abs(seg.rate(b) - next.rate(b)) > 1e-9)
                out.push_back(cat("segments ", s, "/", s + 1, ": discontinuous at ", b, " MW"));
        }
    }
    return out;
}

std::vector<std::string> spec_issues(const ElectrolyzerSpec& spec) {
    std::vector<std::string> out;
    if (!(spec.min_load > 0.0 && spec.min_load < spec.capacity))
        out.push_back("minimum load must lie strictly between 0 and capacity");
    if (!(spec.standby_power >= 0.0 && spec.standby_power < spec.min_load))
        out.push_back("standby power must lie in [0, minimum load)");
    if (spec.min_down_time < 1) out.push_back("minimum down-time must be at least 1 h");
    if (!(spec.mean_efficiency > 0.0)) out.push_back("mean efficiency must be positive");
    auto curve = curve_issues(spec.curve);
    if (curve.empty()) {
        if (spec.curve.min_power() != spec.min_load)
            out.push_back("curve must start at the minimum load");
        if (spec.curve.max_power() != spec.capacity)
            out.push_back("curve must end at capacity");
    }
    append(out, std::move(curve));
    return out;
}

std::vector<std::string> contract_issues(const HydrogenContract& contract,
                                         const ElectrolyzerSpec& spec, int hours) {
    std::vector<std::string> out;
    if (!(contract.price >= 0.0)) out.push_back("hydrogen price must be non-negative");
    if (!(contract.min_daily_demand >= 0.0)) out.push_back("minimum demand must be non-negative");
    if (!(contract.dispenser_capacity > 0.0)) out.push_back("dispenser capacity must be positive");
    if (!spec.curve.segments.empty() &&
        contract.min_daily_demand > hours * spec.curve.max_rate() + 1e-9)
        out.push_back("minimum demand exceeds daily production capability");
    for (std::size_t d = 0; d < contract.trailers.size(); ++d) {
        const auto& tr = contract.trailers[d];
        if (!(tr.capacity > 0.0)) out.push_back(cat("trailer ", d, ": capacity must be positive"));
        if (tr.available.size() != hours) {
            out.push_back(cat("trailer ", d, ": availability length ", tr.available.size()));
            continue;
        }
        // single contiguous on-site window, or connected all day
        int changes = 0;
        for (int t = 1; t < hours; ++t) changes += tr.available[t] != tr.available[t - 1];
        const bool ok = tr.available.all() || (tr.available.any() && changes <= 2 &&
                                                !(tr.available[0] && tr.available[hours - 1]));
        if (!ok) out.push_back(cat("trailer ", d, ": availability is not one window"));
    }
    return out;
}

std::vector<std::string> market_issues(const MarketStructure& market) {
    std::vector<std::string> out;
    if (market.hours_per_day < 1) out.push_back("hours per day must be positive");
    if (market.fcr_block_hours < 1 || market.hours_per_day % market.fcr_block_hours != 0)
        out.push_back("hours per day must be divisible by the FCR block length");
    if (!(market.fcr_bid_min >= 0.0 && market.fcr_bid_min <= market.fcr_bid_max))
        out.push_back("FCR bid limits must satisfy 0 <= min <= max");
    if (!(market.mfrr_bid_min >= 0.0 && market.mfrr_bid_min <= market.mfrr_bid_max))
        out.push_back("mFRR bid limits must satisfy 0 <= min <= max");
    if (!(market.time_step > 0.0)) out.push_back("time step must be positive");
    return out;
}

std::vector<std::string> validate_instance(const DayInstance& inst) {
    std::vector<std::string> out = market_issues(inst.market);
    append(out, spec_issues(inst.spec));
    const int hours = inst.market.hours_per_day;
    append(out, contract_issues(inst.contract, inst.spec, hours));

    auto series = [&](const Eigen::VectorXd& v, long expected, const char* name) {
        if (v.size() != expected)
            out.push_back(cat("price series length: ", name, " has ", v.size(), ", expected ", expected));
        else if (!all_finite(v))
            out.push_back(cat(name, " contains non-finite values"));
    };
    series(inst.da_prices, hours, "da_prices");
    if (inst.market.fcr_block_hours > 0)
        series(inst.fcr_prices, inst.market.num_blocks(), "fcr_prices");
    series(inst.mfrr_up_prices, hours, "mfrr_up_prices");
    series(inst.mfrr_dn_prices, hours, "mfrr_dn_prices");

    auto alpha = [&](const Eigen::VectorXd& a, const char* name) {
        if (a.size() != hours) {
            out.push_back(cat("price series length: ", name, " has ", a.size(), ", expected ", hours));
        } else if (!a.allFinite() || (a.array() < 0.0).any() || (a.array() > 1.0).any()) {
            out.push_back(cat("alpha out of range: ", name, " must lie in [0, 1]"));
        }
    };
    alpha(inst.alpha_up, "alpha_up");
    alpha(inst.alpha_dn, "alpha_dn");

    if (inst.initial_off_residual < 0 ||
        (!inst.initial_off_state && inst.initial_off_residual > 0) ||
        inst.initial_off_residual >= std::max(1, inst.spec.min_down_time))
        out.push_back("initial off residual must lie in [0, min_down_time) and needs an off start");
    return out;
}

const DayInstance& require_valid(const DayInstance& inst) {
    auto issues = validate_instance(inst);
    if (!issues.empty()) throw InvalidInstance(std::move(issues));
    return inst;
}

std::vector<std::string> schedule_issues(const BidSchedule& bids, const DayInstance& inst,
                                         double tol) {
    std::vector<std::string> out;
    const int hours = inst.hours();
    const int blocks = inst.market.num_blocks();
    if (bids.p_da.size() != hours || bids.p_tot.size() != hours || bids.h_sched.size() != hours ||
        bids.p_mfrr_up.size() != hours || bids.p_mfrr_dn.size() != hours ||
        bids.p_fcr.size() != blocks || static_cast<int>(bids.states.size()) != hours) {
        out.push_back("bid schedule has wrong dimensions");
        return out;
    }
    const auto& m = inst.market;
    auto gated = [&](double q, double lo, double hi) { return q <= tol || (q >= lo - tol && q <= hi + tol); };
    for (int t = 0; t < hours; ++t) {
        const double standby = bids.states[t] == OperatingState::Standby ? inst.spec.standby_power : 0.0;
        if (std::abs(bids.p_da[t] - bids.p_tot[t] - standby) > tol)
            out.push_back(cat("hour ", t, ": day-ahead quantity differs from scheduled consumption"));
        if (!gated(bids.p_mfrr_up[t], m.mfrr_bid_min, m.mfrr_bid_max) ||
            !gated(bids.p_mfrr_dn[t], m.mfrr_bid_min, m.mfrr_bid_max))
            out.push_back(cat("hour ", t, ": mFRR bid outside size limits"));
        if (bids.states[t] != OperatingState::Online && bids.p_tot[t] > tol)
            out.push_back(cat("hour ", t, ": consumption while not online"));
    }
    for (int i = 0; i < blocks; ++i) {
        if (!gated(bids.p_fcr[i], m.fcr_bid_min, m.fcr_bid_max))
            out.push_back(cat("block ", i, ": FCR bid outside size limits"));
    }
    return out;
}

// -- default asset ----------------------------------------------------------

double ReferenceYieldModel::yield(double x) const {
    const double b = (peak_yield - full_load_yield) / ((1.0 - peak_loading) * (1.0 - peak_loading));
    const double c = b * peak_loading * peak_loading;
    const double a = peak_yield + 2.0 * b * peak_loading;
    return a - b * x - c / x;
}

ProductionCurve fit_production_curve(const ReferenceYieldModel& model, const CurveFitOptions& options) {
    const auto& frac = options.breakpoints;
    const int knots = static_cast<int>(frac.size());
    if (knots < 2) throw DomainError("curve fit needs at least two breakpoints");
    if (!std::is_sorted(frac.begin(), frac.end()) || frac.front() <= 0.0)
        throw DomainError("curve fit breakpoints must be positive and increasing");

    const double cap = options.capacity;
    Eigen::VectorXd knot_p(knots);
    for (int k = 0; k < knots; ++k) knot_p[k] = frac[k] * cap;

    // hat-function design matrix over the knot values
    const int n = options.samples;
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n, knots);
    Eigen::VectorXd target(n);
    for (int j = 0; j < n; ++j) {
        const double p = knot_p[0] + (knot_p[knots - 1] - knot_p[0]) * j / (n - 1);
        int k = 0;
        while (k + 2 < knots && p > knot_p[k + 1]) ++k;
        const double w = (p - knot_p[k]) / (knot_p[k + 1] - knot_p[k]);
        design(j, k) = 1.0 - w;
        design(j, k + 1) = w;
        target[j] = model.rate(p, cap);
    }
    const Eigen::VectorXd values = design.colPivHouseholderQr().solve(target);

    ProductionCurve curve;
    for (int k = 0; k + 1 < knots; ++k) {
        CurveSegment seg;
        seg.p_min = knot_p[k];
        seg.p_max = knot_p[k + 1];
        seg.slope = (values[k + 1] - values[k]) / (seg.p_max - seg.p_min);
        seg.intercept = values[k] - seg.slope * seg.p_min;
        curve.segments.push_back(seg);
    }
    return curve;
}

double mean_specific_yield(const ReferenceYieldModel& model, double capacity, double min_load,
                           int samples) {
    double sum = 0.0;
    for (int j = 0; j < samples; ++j) {
        const double p = min_load + (capacity - min_load) * j / (samples - 1);
        sum += model.yield(p / capacity);
    }
    return sum / samples;
}

ElectrolyzerSpec default_electrolyzer(double capacity) {
    const ReferenceYieldModel model;
    CurveFitOptions fit;
    fit.capacity = capacity;
    ElectrolyzerSpec spec;
    spec.capacity = capacity;
    spec.min_load = 0.1 * capacity;
    spec.standby_power = 0.01 * capacity;
    spec.min_down_time = 2;
    spec.curve = fit_production_curve(model, fit);
    // pin the end points exactly to the asset limits
    spec.curve.segments.front().p_min = spec.min_load;
    spec.curve.segments.back().p_max = capacity;
    spec.mean_efficiency = mean_specific_yield(model, capacity, spec.min_load);
    return spec;
}

HydrogenContract default_contract(int hours) {
    HydrogenContract c;
    c.price = 10.0;
    c.min_daily_demand = 2000.0;
    c.dispenser_capacity = 200.0;
    for (int d = 0; d < 3; ++d) c.trailers.push_back({1000.0, Mask::Constant(hours, true)});
    return c;
}

}  // namespace h2bid
