// Physical and market domain types for a grid-connected electrolyzer that
// sells hydrogen under a bilateral contract and bids into day-ahead, FCR and
// mFRR capacity markets.
//
// Units: power in MW, energy in MWh, hydrogen in kg, money in EUR.

#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace h2bid {

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInstance : public std::runtime_error {
public:
    explicit InvalidInstance(std::vector<std::string> issues);
    const std::vector<std::string>& issues() const { return issues_; }

private:
    std::vector<std::string> issues_;
};

/// One linear piece of the hydrogen production curve: rate = slope * p + intercept
/// for p in [p_min, p_max].
struct CurveSegment {
    double p_min = 0.0;
    double p_max = 0.0;
    double slope = 0.0;      // kg/MWh
    double intercept = 0.0;  // kg/h

    double rate(double p) const { return slope * p + intercept; }
};

struct ProductionCurve {
    std::vector<CurveSegment> segments;

    int size() const { return static_cast<int>(segments.size()); }
    double min_power() const { return segments.front().p_min; }
    double max_power() const { return segments.back().p_max; }
    double max_rate() const;
};

struct ElectrolyzerSpec {
    double capacity = 10.0;        // C^e
    double min_load = 1.0;         // lowest online power
    double standby_power = 0.1;    // constant draw while in standby
    ProductionCurve curve;
    int min_down_time = 2;         // hours a shutdown lasts at least
    double mean_efficiency = 0.0;  // kg/MWh, prices the regulation bid
};

/// On-site tube-trailer. `available[t]` is true while the trailer is connected.
struct TrailerSlot {
    double capacity = 0.0;
    Mask available;
};

struct HydrogenContract {
    double price = 10.0;             // EUR/kg
    double min_daily_demand = 0.0;   // kg per day
    double dispenser_capacity = 0.0; // kg/h into a single trailer
    std::vector<TrailerSlot> trailers;
};

struct MarketStructure {
    int hours_per_day = 24;
    int fcr_block_hours = 4;
    double fcr_bid_min = 0.1;
    double fcr_bid_max = 10.0;
    double mfrr_bid_min = 0.1;
    double mfrr_bid_max = 10.0;
    double time_step = 1.0;  // h

    int num_blocks() const { return hours_per_day / fcr_block_hours; }
    int block_of(int hour) const { return hour / fcr_block_hours; }
};

/// Everything the day-ahead bidding problem needs for one delivery day.
///
/// FCR prices are per MW and hour of the block; the block revenue is
/// `fcr_prices[i] * fcr_block_hours * p_fcr[i]`.
struct DayInstance {
    std::string label;
    ElectrolyzerSpec spec;
    MarketStructure market;
    HydrogenContract contract;
    Eigen::VectorXd da_prices;
    Eigen::VectorXd fcr_prices;
    Eigen::VectorXd mfrr_up_prices;
    Eigen::VectorXd mfrr_dn_prices;
    Eigen::VectorXd alpha_up;
    Eigen::VectorXd alpha_dn;
    // Unit is already off when the day starts; `initial_off_residual` more
    // hours of the shutdown are still mandatory.
    bool initial_off_state = false;
    int initial_off_residual = 0;

    int hours() const { return market.hours_per_day; }
};

enum class OperatingState { Online, Standby, Off };

const char* to_string(OperatingState state);

struct BidSchedule {
    Eigen::VectorXd p_da;
    Eigen::VectorXd p_fcr;
    Eigen::VectorXd p_mfrr_up;
    Eigen::VectorXd p_mfrr_dn;
    Eigen::VectorXd p_tot;
    Eigen::VectorXd h_sched;
    std::vector<OperatingState> states;

    int hours() const { return static_cast<int>(p_da.size()); }
};

/// Hydrogen rate (kg/h) at power `p`. Zero power produces nothing; powers in
/// the band (0, min_power) are not physically reachable. A breakpoint is
/// evaluated with the lower segment. `tol` absorbs solver round-off near the
/// band edges.
double evaluate_curve(const ProductionCurve& curve, double p, double tol = 1e-9);

/// Index of the segment owning `p`, or -1 for p == 0.
int segment_of(const ProductionCurve& curve, double p, double tol = 1e-9);

std::vector<std::string> curve_issues(const ProductionCurve& curve);
std::vector<std::string> spec_issues(const ElectrolyzerSpec& spec);
std::vector<std::string> contract_issues(const HydrogenContract& contract,
                                         const ElectrolyzerSpec& spec, int hours);
std::vector<std::string> market_issues(const MarketStructure& market);
std::vector<std::string> schedule_issues(const BidSchedule& bids, const DayInstance& inst,
                                         double tol = 1e-6);

/// All violated invariants of the instance; empty when valid.
std::vector<std::string> validate_instance(const DayInstance& inst);

/// Returns `inst` unchanged or throws InvalidInstance carrying every issue.
const DayInstance& require_valid(const DayInstance& inst);

// -- default asset ----------------------------------------------------------

/// Reference specific-yield model used to generate the default curve:
/// eta(x) = a - b x - c / x over the loading x = p / capacity, with its
/// maximum `peak_yield` at `peak_loading` and `full_load_yield` at x = 1.
struct ReferenceYieldModel {
    double peak_loading = 0.3;
    double peak_yield = 18.5;       // kg/MWh
    double full_load_yield = 16.7;  // kg/MWh

    double yield(double loading) const;
    double rate(double power, double capacity) const { return power * yield(power / capacity); }
};

struct CurveFitOptions {
    double capacity = 10.0;
    std::vector<double> breakpoints = {0.1, 0.3, 0.5, 0.75, 1.0};  // loading fractions
    int samples = 901;
};

/// Continuous piecewise-linear least-squares fit of the reference model over
/// the breakpoint range. Continuity is exact by construction: the unknowns are
/// the curve values at the breakpoints.
ProductionCurve fit_production_curve(const ReferenceYieldModel& model,
                                     const CurveFitOptions& options);

/// Average specific yield of the reference model over [min_load, capacity].
double mean_specific_yield(const ReferenceYieldModel& model, double capacity, double min_load,
                           int samples = 901);

/// 10 MW unit: 10 % minimum load, 1 % standby draw, 2 h minimum down-time and
/// the fitted default curve.
ElectrolyzerSpec default_electrolyzer(double capacity = 10.0);

/// Three all-day trailers exchanged at midnight.
HydrogenContract default_contract(int hours = 24);

}  // namespace h2bid
