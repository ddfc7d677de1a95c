#include "h2bid/milp_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace h2bid {

const char* to_string(RowFamily family) {
    switch (family) {
        case RowFamily::Generic: return "generic";
        case RowFamily::SegmentBounds: return "segment_bounds";
        case RowFamily::OneSegment: return "one_segment";
        case RowFamily::ProductionCurve: return "production_curve";
        case RowFamily::TotalPower: return "total_power";
        case RowFamily::OnlineState: return "online_state";
        case RowFamily::StandbyPower: return "standby_power";
        case RowFamily::MinDownTime: return "min_down_time";
        case RowFamily::OneState: return "one_state";
        case RowFamily::DayAheadBid: return "day_ahead_bid";
        case RowFamily::DownReserveHeadroom: return "down_reserve_headroom";
        case RowFamily::UpReserveHeadroom: return "up_reserve_headroom";
        case RowFamily::FcrBidSize: return "fcr_bid_size";
        case RowFamily::MfrrDownBidSize: return "mfrr_dn_bid_size";
        case RowFamily::MfrrUpBidSize: return "mfrr_up_bid_size";
        case RowFamily::ActUpPower: return "act_up_power";
        case RowFamily::ActUpSegmentBounds: return "act_up_segment_bounds";
        case RowFamily::ActUpOneSegment: return "act_up_one_segment";
        case RowFamily::ActUpProduction: return "act_up_production";
        case RowFamily::ActUpMinDemand: return "act_up_min_demand";
        case RowFamily::ActDownPower: return "act_dn_power";
        case RowFamily::ActDownSegmentBounds: return "act_dn_segment_bounds";
        case RowFamily::ActDownOneSegment: return "act_dn_one_segment";
        case RowFamily::ActDownProduction: return "act_dn_production";
        case RowFamily::ActDownDispatch: return "act_dn_dispatch";
        case RowFamily::DispenserCapacity: return "dispenser_capacity";
        case RowFamily::TrailerFillStart: return "trailer_fill_start";
        case RowFamily::TrailerFillBalance: return "trailer_fill_balance";
        case RowFamily::TrailerCapacity: return "trailer_capacity";
        case RowFamily::ScheduledMinDemand: return "scheduled_min_demand";
        case RowFamily::ActUpOrdering: return "act_up_ordering";
        case RowFamily::ActDownOrdering: return "act_dn_ordering";
        case RowFamily::Count_: break;
    }
    return "?";
}

MilpModel::MilpModel(int num_vars)
    : objective(Eigen::VectorXd::Zero(num_vars)),
      lower(Eigen::VectorXd::Zero(num_vars)),
      upper(Eigen::VectorXd::Constant(num_vars, kInf)),
      binary(num_vars, false),
      names(num_vars) {
    for (int j = 0; j < num_vars; ++j) names[j] = "x" + std::to_string(j);
}

int MilpModel::num_binaries() const {
    return static_cast<int>(std::count(binary.begin(), binary.end(), true));
}

void MilpModel::set_column(int col, double lo, double hi, double obj, bool is_binary) {
    lower[col] = lo;
    upper[col] = hi;
    objective[col] = obj;
    binary[col] = is_binary;
}

int MilpModel::add_row(std::vector<Term> terms, Relation relation, double rhs, RowFamily family) {
    rows.push_back({std::move(terms), relation, rhs, family});
    return num_rows() - 1;
}

double MilpModel::row_violation(int r, const Eigen::VectorXd& x) const {
    const auto& row = rows[r];
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += t.coef * x[t.col];
    switch (row.relation) {
        case Relation::LessEqual: return std::max(0.0, lhs - row.rhs);
        case Relation::GreaterEqual: return std::max(0.0, row.rhs - lhs);
        case Relation::Equal: return std::abs(lhs - row.rhs);
    }
    return 0.0;
}

double MilpModel::max_row_violation(const Eigen::VectorXd& x) const {
    double worst = 0.0;
    for (int r = 0; r < num_rows(); ++r) worst = std::max(worst, row_violation(r, x));
    return worst;
}

double MilpModel::max_bound_violation(const Eigen::VectorXd& x) const {
    double worst = 0.0;
    for (int j = 0; j < num_vars(); ++j)
        worst = std::max({worst, lower[j] - x[j], x[j] - upper[j]});
    return worst;
}

double MilpModel::max_integrality_violation(const Eigen::VectorXd& x) const {
    double worst = 0.0;
    for (int j = 0; j < num_vars(); ++j)
        if (binary[j]) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
    return worst;
}

std::vector<std::string> MilpModel::structural_issues() const {
    std::vector<std::string> out;
    const int n = num_vars();
    if (lower.size() != n || upper.size() != n || static_cast<int>(binary.size()) != n)
        out.push_back("column arrays differ in length");
    for (int r = 0; r < num_rows(); ++r)
        for (const auto& t : rows[r].terms)
            if (t.col < 0 || t.col >= n) out.push_back("row " + std::to_string(r) + " references column " + std::to_string(t.col));
    for (int j = 0; j < n; ++j) {
        if (lower[j] > upper[j]) out.push_back("column " + names[j] + " has empty bounds");
        if (binary[j] && (lower[j] < 0.0 || upper[j] > 1.0))
            out.push_back("binary column " + names[j] + " not within [0, 1]");
    }
    return out;
}

}  // namespace h2bid
