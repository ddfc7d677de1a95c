#include "h2bid/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

namespace h2bid {

namespace {

enum class Shape { HourSegment, Hour, Block, HourTrailer };

Shape shape_of(VarKind kind) {
    switch (kind) {
        case VarKind::PowerSegment:
        case VarKind::ActUpPower:
        case VarKind::ActDownPower:
        case VarKind::SegmentOn:
        case VarKind::ActUpSegmentOn:
        case VarKind::ActDownSegmentOn: return Shape::HourSegment;
        case VarKind::Fcr:
        case VarKind::FcrOn: return Shape::Block;
        case VarKind::Dispensed:
        case VarKind::TrailerFill: return Shape::HourTrailer;
        default: return Shape::Hour;
    }
}

}  // namespace

const char* to_string(VarKind kind) {
    switch (kind) {
        case VarKind::PowerSegment: return "p_e";
        case VarKind::Hydrogen: return "h_e";
        case VarKind::PowerTotal: return "p_tot";
        case VarKind::PowerStandby: return "p_sb";
        case VarKind::PowerDayAhead: return "p_da";
        case VarKind::Fcr: return "p_fcr";
        case VarKind::MfrrUp: return "p_mfrr_up";
        case VarKind::MfrrDown: return "p_mfrr_dn";
        case VarKind::ActUpPower: return "p_act_up";
        case VarKind::ActDownPower: return "p_act_dn";
        case VarKind::ActUpHydrogen: return "h_act_up";
        case VarKind::ActDownHydrogen: return "h_act_dn";
        case VarKind::Dispensed: return "h_disp";
        case VarKind::TrailerFill: return "s_disp";
        case VarKind::SegmentOn: return "z_e";
        case VarKind::Online: return "z_on";
        case VarKind::Standby: return "z_sb";
        case VarKind::Off: return "z_off";
        case VarKind::FcrOn: return "z_fcr";
        case VarKind::MfrrUpOn: return "z_m_up";
        case VarKind::MfrrDownOn: return "z_m_dn";
        case VarKind::ActUpSegmentOn: return "z_act_up";
        case VarKind::ActDownSegmentOn: return "z_act_dn";
        case VarKind::Count_: break;
    }
    return "?";
}

bool is_binary_kind(VarKind kind) { return kind >= VarKind::SegmentOn && kind < VarKind::Count_; }

VarIndex::VarIndex(int hours, int segments, int blocks, int trailers)
    : hours_(hours), segments_(segments), blocks_(blocks), trailers_(trailers) {
    offset_[0] = 0;
    for (int k = 0; k < kVarKinds; ++k) {
        int n = 0;
        switch (shape_of(static_cast<VarKind>(k))) {
            case Shape::HourSegment: n = hours * segments; break;
            case Shape::Hour: n = hours; break;
            case Shape::Block: n = blocks; break;
            case Shape::HourTrailer: n = hours * trailers; break;
        }
        offset_[k + 1] = offset_[k] + n;
    }
}

int VarIndex::count(VarKind kind) const {
    const int k = static_cast<int>(kind);
    return offset_[k + 1] - offset_[k];
}

int VarIndex::column(const VarRef& r) const {
    const int base = offset_[static_cast<int>(r.kind)];
    switch (shape_of(r.kind)) {
        case Shape::HourSegment: return base + r.t * segments_ + r.s;
        case Shape::Hour: return base + r.t;
        case Shape::Block: return base + r.i;
        case Shape::HourTrailer: return base + r.t * trailers_ + r.d;
    }
    return -1;
}

VarRef VarIndex::ref(int col) const {
    const int k = static_cast<int>(std::upper_bound(offset_.begin(), offset_.end(), col) - offset_.begin()) - 1;
    const auto kind = static_cast<VarKind>(k);
    const int local = col - offset_[k];
    VarRef r{kind};
    switch (shape_of(kind)) {
        case Shape::HourSegment: r.t = local / segments_; r.s = local % segments_; break;
        case Shape::Hour: r.t = local; break;
        case Shape::Block: r.i = local; break;
        case Shape::HourTrailer: r.t = local / trailers_; r.d = local % trailers_; break;
    }
    return r;
}

std::string VarIndex::name(int col) const {
    const VarRef r = ref(col);
    std::ostringstream out;
    out << to_string(r.kind);
    switch (shape_of(r.kind)) {
        case Shape::HourSegment: out << "_t" << r.t << "_s" << r.s; break;
        case Shape::Hour: out << "_t" << r.t; break;
        case Shape::Block: out << "_i" << r.i; break;
        case Shape::HourTrailer: out << "_t" << r.t << "_d" << r.d; break;
    }
    return out.str();
}

DayModel build_model(const DayInstance& inst, const ModelOptions& options) {
    require_valid(inst);

    const auto& spec = inst.spec;
    const auto& market = inst.market;
    const auto& contract = inst.contract;
    const auto& segs = spec.curve.segments;
    const int T = market.hours_per_day;
    const int S = spec.curve.size();
    const int I = market.num_blocks();
    const int D = static_cast<int>(contract.trailers.size());
    const double dt = market.time_step;

    DayModel out;
    out.options = options;
    out.index = VarIndex(T, S, I, D);
    const VarIndex& ix = out.index;
    MilpModel& m = out.milp;
    m = MilpModel(ix.num_vars());
    for (int j = 0; j < ix.num_vars(); ++j) {
        m.names[j] = ix.name(j);
        if (is_binary_kind(ix.ref(j).kind)) m.set_binary(j);
    }

    // profit
    for (int t = 0; t < T; ++t) {
        m.objective[ix.at(VarKind::Hydrogen, t)] = contract.price;
        m.objective[ix.at(VarKind::MfrrUp, t)] = inst.mfrr_up_prices[t];
        m.objective[ix.at(VarKind::MfrrDown, t)] = inst.mfrr_dn_prices[t];
        m.objective[ix.at(VarKind::PowerDayAhead, t)] = -inst.da_prices[t];
    }
    for (int i = 0; i < I; ++i)
        m.objective[ix.block(VarKind::Fcr, i)] = inst.fcr_prices[i] * market.fcr_block_hours;

    using R = Relation;
    using F = RowFamily;

    // Piecewise curve with at most one active segment, for the scheduled
    // dispatch and both activated dispatches.
    auto curve_block = [&](int t, VarKind power, VarKind gate, VarKind hydrogen, F bounds, F one, F prod) {
        std::vector<Term> pick;
        std::vector<Term> rate{{ix.at(hydrogen, t), 1.0}};
        for (int s = 0; s < S; ++s) {
            const int p = ix.seg(power, t, s);
            const int z = ix.seg(gate, t, s);
            m.add_row({{p, 1.0}, {z, -segs[s].p_min}}, R::GreaterEqual, 0.0, bounds);
            m.add_row({{p, 1.0}, {z, -segs[s].p_max}}, R::LessEqual, 0.0, bounds);
            pick.push_back({z, 1.0});
            rate.push_back({p, -segs[s].slope * dt});
            rate.push_back({z, -segs[s].intercept * dt});
        }
        m.add_row(std::move(pick), R::LessEqual, 1.0, one);
        m.add_row(std::move(rate), R::Equal, 0.0, prod);
        SelectionGroup group;
        for (int s = 0; s < S; ++s) {
            group.members.push_back(ix.seg(gate, t, s));
            group.lo.push_back(segs[s].p_min);
            group.hi.push_back(segs[s].p_max);
            group.expression.push_back({ix.seg(power, t, s), 1.0});
        }
        m.selection_groups.push_back(std::move(group));
    };
    auto gate_group = [&](int p, int z, double lo, double hi) {
        m.selection_groups.push_back({{z}, {lo}, {hi}, {{p, 1.0}}});
    };

    for (int t = 0; t < T; ++t) {
        curve_block(t, VarKind::PowerSegment, VarKind::SegmentOn, VarKind::Hydrogen, F::SegmentBounds,
                    F::OneSegment, F::ProductionCurve);

        std::vector<Term> total{{ix.at(VarKind::PowerTotal, t), 1.0}};
        std::vector<Term> online{{ix.at(VarKind::Online, t), 1.0}};
        for (int s = 0; s < S; ++s) {
            total.push_back({ix.p_e(t, s), -1.0});
            online.push_back({ix.seg(VarKind::SegmentOn, t, s), -1.0});
        }
        m.add_row(std::move(total), R::Equal, 0.0, F::TotalPower);
        m.add_row(std::move(online), R::Equal, 0.0, F::OnlineState);
        m.add_row({{ix.at(VarKind::PowerStandby, t), 1.0}, {ix.at(VarKind::Standby, t), -spec.standby_power}},
                  R::Equal, 0.0, F::StandbyPower);

        // A shutdown starting at t keeps the unit off through t + N_down - 1.
        const int off_t = ix.at(VarKind::Off, t);
        const bool previous_known_on = t > 0 || !inst.initial_off_state;
        if (previous_known_on) {
            for (int n = t + 1; n < std::min(T, t + spec.min_down_time); ++n) {
                std::vector<Term> row{{off_t, 1.0}, {ix.at(VarKind::Off, n), -1.0}};
                if (t > 0) row.push_back({ix.at(VarKind::Off, t - 1), -1.0});
                m.add_row(std::move(row), R::LessEqual, 0.0, F::MinDownTime);
            }
        }

        m.add_row({{ix.at(VarKind::Online, t), 1.0}, {ix.at(VarKind::Standby, t), 1.0}, {off_t, 1.0}},
                  R::Equal, 1.0, F::OneState);
        m.add_row({{ix.at(VarKind::PowerDayAhead, t), 1.0},
                   {ix.at(VarKind::PowerTotal, t), -1.0},
                   {ix.at(VarKind::PowerStandby, t), -1.0}},
                  R::Equal, 0.0, F::DayAheadBid);

        const int fcr = ix.block(VarKind::Fcr, market.block_of(t));
        const int p_tot = ix.at(VarKind::PowerTotal, t);
        m.add_row({{fcr, 1.0}, {ix.at(VarKind::MfrrDown, t), 1.0}, {p_tot, 1.0}, {off_t, spec.capacity}},
                  R::LessEqual, spec.capacity, F::DownReserveHeadroom);
        if (options.standby_aware_up_headroom) {
            m.add_row({{fcr, 1.0}, {ix.at(VarKind::MfrrUp, t), 1.0}, {p_tot, -1.0},
                       {ix.at(VarKind::Online, t), spec.min_load}},
                      R::LessEqual, 0.0, F::UpReserveHeadroom);
        } else {
            m.add_row({{fcr, 1.0}, {ix.at(VarKind::MfrrUp, t), 1.0}, {p_tot, -1.0}, {off_t, -spec.min_load}},
                      R::LessEqual, -spec.min_load, F::UpReserveHeadroom);
        }

        for (auto [p, z, fam] : {std::tuple{VarKind::MfrrDown, VarKind::MfrrDownOn, F::MfrrDownBidSize},
                                 std::tuple{VarKind::MfrrUp, VarKind::MfrrUpOn, F::MfrrUpBidSize}}) {
            m.add_row({{ix.at(p, t), 1.0}, {ix.at(z, t), -market.mfrr_bid_min}}, R::GreaterEqual, 0.0, fam);
            m.add_row({{ix.at(p, t), 1.0}, {ix.at(z, t), -market.mfrr_bid_max}}, R::LessEqual, 0.0, fam);
            gate_group(ix.at(p, t), ix.at(z, t), market.mfrr_bid_min, market.mfrr_bid_max);
        }
    }

    for (int i = 0; i < I; ++i) {
        const int p = ix.block(VarKind::Fcr, i);
        const int z = ix.block(VarKind::FcrOn, i);
        m.add_row({{p, 1.0}, {z, -market.fcr_bid_min}}, R::GreaterEqual, 0.0, F::FcrBidSize);
        m.add_row({{p, 1.0}, {z, -market.fcr_bid_max}}, R::LessEqual, 0.0, F::FcrBidSize);
        gate_group(p, z, market.fcr_bid_min, market.fcr_bid_max);
    }

    // upward activation: consumption drops by alpha * p_mfrr_up
    std::vector<Term> daily_up;
    for (int t = 0; t < T; ++t) {
        std::vector<Term> power{{ix.at(VarKind::PowerTotal, t), -1.0},
                                {ix.at(VarKind::MfrrUp, t), inst.alpha_up[t]}};
        for (int s = 0; s < S; ++s) power.push_back({ix.seg(VarKind::ActUpPower, t, s), 1.0});
        m.add_row(std::move(power), R::Equal, 0.0, F::ActUpPower);
        curve_block(t, VarKind::ActUpPower, VarKind::ActUpSegmentOn, VarKind::ActUpHydrogen,
                    F::ActUpSegmentBounds, F::ActUpOneSegment, F::ActUpProduction);
        daily_up.push_back({ix.at(VarKind::ActUpHydrogen, t), 1.0});
    }
    m.add_row(std::move(daily_up), R::GreaterEqual, contract.min_daily_demand, F::ActUpMinDemand);

    // downward activation: consumption rises by alpha * p_mfrr_dn and the extra
    // hydrogen has to fit the trailers
    for (int t = 0; t < T; ++t) {
        std::vector<Term> power{{ix.at(VarKind::PowerTotal, t), -1.0},
                                {ix.at(VarKind::MfrrDown, t), -inst.alpha_dn[t]}};
        for (int s = 0; s < S; ++s) power.push_back({ix.seg(VarKind::ActDownPower, t, s), 1.0});
        m.add_row(std::move(power), R::Equal, 0.0, F::ActDownPower);
        curve_block(t, VarKind::ActDownPower, VarKind::ActDownSegmentOn, VarKind::ActDownHydrogen,
                    F::ActDownSegmentBounds, F::ActDownOneSegment, F::ActDownProduction);

        std::vector<Term> dispatch{{ix.at(VarKind::ActDownHydrogen, t), 1.0}};
        for (int d = 0; d < D; ++d) dispatch.push_back({ix.trailer(VarKind::Dispensed, t, d), -1.0});
        m.add_row(std::move(dispatch), R::Equal, 0.0, F::ActDownDispatch);

        for (int d = 0; d < D; ++d) {
            const int h = ix.trailer(VarKind::Dispensed, t, d);
            const int fill = ix.trailer(VarKind::TrailerFill, t, d);
            const double gate = contract.trailers[d].available[t] ? 1.0 : 0.0;
            m.add_row({{h, 1.0}}, R::LessEqual, contract.dispenser_capacity * gate, F::DispenserCapacity);
            if (t == 0) {
                m.add_row({{fill, 1.0}, {h, -1.0}}, R::Equal, 0.0, F::TrailerFillStart);
            } else {
                m.add_row({{fill, 1.0}, {ix.trailer(VarKind::TrailerFill, t - 1, d), -1.0}, {h, -1.0}},
                          R::Equal, 0.0, F::TrailerFillBalance);
            }
            m.add_row({{fill, 1.0}}, R::LessEqual, contract.trailers[d].capacity, F::TrailerCapacity);
        }
    }

    if (options.scheduled_min_demand) {
        std::vector<Term> daily;
        for (int t = 0; t < T; ++t) daily.push_back({ix.at(VarKind::Hydrogen, t), 1.0});
        m.add_row(std::move(daily), R::GreaterEqual, contract.min_daily_demand, F::ScheduledMinDemand);
    }

    if (options.activation_ordering) {
        // Smallest k with f(q) - f(p) >= k (q - p) for p <= q, including p = 0.
        double k = kInf;
        bool increasing = true;
        for (const auto& seg : segs) {
            k = std::min({k, seg.slope, seg.rate(seg.p_min) / seg.p_min, seg.rate(seg.p_max) / seg.p_max});
            increasing = increasing && seg.slope > 0.0 && seg.p_min > 0.0 && seg.rate(seg.p_min) > 0.0;
        }
        for (int s = 1; s < S; ++s)
            increasing = increasing && segs[s].rate(segs[s].p_min) >= segs[s - 1].rate(segs[s - 1].p_max) - 1e-9;
        if (increasing) {
            k *= dt;
            for (int t = 0; t < T; ++t) {
                const int h = ix.at(VarKind::Hydrogen, t);
                m.add_row({{ix.at(VarKind::ActUpHydrogen, t), 1.0}, {h, -1.0},
                           {ix.at(VarKind::MfrrUp, t), k * inst.alpha_up[t]}},
                          R::LessEqual, 0.0, F::ActUpOrdering);
                m.add_row({{ix.at(VarKind::ActDownHydrogen, t), 1.0}, {h, -1.0},
                           {ix.at(VarKind::MfrrDown, t), -k * inst.alpha_dn[t]}},
                          R::GreaterEqual, 0.0, F::ActDownOrdering);
            }
        }
        // An online unit keeps at least min load under either activation, so
        // it sits on exactly one activated segment.
        if (spec.min_load > 0.0) {
            for (int t = 0; t < T; ++t) {
                std::vector<Term> up{{ix.at(VarKind::Online, t), -1.0}};
                std::vector<Term> dn{{ix.at(VarKind::Online, t), -1.0}};
                for (int s = 0; s < S; ++s) {
                    up.push_back({ix.seg(VarKind::ActUpSegmentOn, t, s), 1.0});
                    dn.push_back({ix.seg(VarKind::ActDownSegmentOn, t, s), 1.0});
                }
                m.add_row(std::move(up), R::Equal, 0.0, F::ActUpOrdering);
                m.add_row(std::move(dn), R::GreaterEqual, 0.0, F::ActDownOrdering);
            }
        }
    }

    if (inst.initial_off_state) {
        for (int t = 0; t < std::min(T, inst.initial_off_residual); ++t) {
            const int z = ix.at(VarKind::Off, t);
            m.set_column(z, 1.0, 1.0, 0.0, true);
        }
    }
    return out;
}

void disable_reserves(DayModel& model) {
    const auto& ix = model.index;
    auto& m = model.milp;
    auto fix = [&](int col) {
        m.lower[col] = 0.0;
        m.upper[col] = 0.0;
    };
    for (int i = 0; i < ix.blocks(); ++i) {
        fix(ix.block(VarKind::Fcr, i));
        fix(ix.block(VarKind::FcrOn, i));
    }
    for (int t = 0; t < ix.hours(); ++t) {
        for (auto k : {VarKind::MfrrUp, VarKind::MfrrDown, VarKind::MfrrUpOn, VarKind::MfrrDownOn})
            fix(ix.at(k, t));
    }
}

BidSchedule extract_bids(const DayModel& model, const DayInstance& inst, const Eigen::VectorXd& x,
                         double feas_tol, double int_tol) {
    const auto& ix = model.index;
    const auto& m = model.milp;
    if (x.size() != m.num_vars()) throw ContractViolation("solution has wrong length");
    if (m.max_integrality_violation(x) > int_tol) throw ContractViolation("solution is not integral");
    if (m.max_row_violation(x) > feas_tol || m.max_bound_violation(x) > feas_tol)
        throw ContractViolation("solution is infeasible");

    const int T = ix.hours();
    BidSchedule bids;
    bids.p_da.resize(T);
    bids.p_tot.resize(T);
    bids.h_sched.resize(T);
    bids.p_mfrr_up.resize(T);
    bids.p_mfrr_dn.resize(T);
    bids.p_fcr.resize(ix.blocks());
    bids.states.resize(T);
    auto clean = [](double v) { return std::abs(v) < 1e-12 ? 0.0 : v; };
    for (int t = 0; t < T; ++t) {
        bids.p_da[t] = clean(x[ix.at(VarKind::PowerDayAhead, t)]);
        bids.p_tot[t] = clean(x[ix.at(VarKind::PowerTotal, t)]);
        bids.h_sched[t] = clean(x[ix.at(VarKind::Hydrogen, t)]);
        bids.p_mfrr_up[t] = clean(x[ix.at(VarKind::MfrrUp, t)]);
        bids.p_mfrr_dn[t] = clean(x[ix.at(VarKind::MfrrDown, t)]);
        if (x[ix.at(VarKind::Online, t)] > 0.5) bids.states[t] = OperatingState::Online;
        else if (x[ix.at(VarKind::Standby, t)] > 0.5) bids.states[t] = OperatingState::Standby;
        else bids.states[t] = OperatingState::Off;
    }
    for (int i = 0; i < ix.blocks(); ++i) bids.p_fcr[i] = clean(x[ix.block(VarKind::Fcr, i)]);

    if (auto issues = schedule_issues(bids, inst, feas_tol); !issues.empty())
        throw ContractViolation("bid schedule invariant: " + issues.front());
    return bids;
}

}  // namespace h2bid
