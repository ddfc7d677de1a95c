// Ex-post evaluation of day-ahead bids against the realized balancing market:
// which mFRR bids got activated, what the electrolyzer then actually did, and
// what the day earned.

#pragma once

#include "h2bid/branch_and_bound.hpp"
#include "h2bid/domain.hpp"
#include "h2bid/model.hpp"

#include <functional>
#include <string>

namespace h2bid {

struct RealizedDay {
    std::string label;
    Eigen::VectorXd balancing_prices;  // EUR/MWh
    Mask system_short;                 // I_t < 0
    // Settlement prices; equal to the forecast series unless a study says otherwise.
    Eigen::VectorXd da_prices;
    Eigen::VectorXd fcr_prices;
    Eigen::VectorXd mfrr_up_prices;
    Eigen::VectorXd mfrr_dn_prices;
    // Downward activation is not procured in practice; kept for synthetic studies.
    Mask activated_dn;
};

/// Realized day with settlement prices copied from the instance, no system
/// deficit and balancing price 0.
RealizedDay quiet_day(const DayInstance& inst);

std::vector<std::string> realized_issues(const RealizedDay& day, int hours, int blocks);

/// Hour-by-hour left-to-right sum. Reported hydrogen totals use it so a plain
/// replay loop reproduces them bit for bit.
double sum_in_order(const Eigen::VectorXd& v);

struct ProfitBreakdown {
    double hydrogen = 0.0;
    double fcr = 0.0;
    double mfrr = 0.0;
    double da_cost = 0.0;
    double activation = 0.0;

    double total() const { return hydrogen + fcr + mfrr - da_cost + activation; }
};

enum class Variation { NoAS, Oracle, AlphaZero, AlphaOne };

inline constexpr Variation kAllVariations[] = {Variation::NoAS, Variation::Oracle, Variation::AlphaZero,
                                               Variation::AlphaOne};

const char* to_string(Variation v);      // "noas", "oracle", "a0", "a1"
Variation parse_variation(const std::string& text);  // throws std::invalid_argument

struct Redispatch {
    Eigen::VectorXd consumption;  // MW including standby draw
    Eigen::VectorXd hydrogen;     // kg per hour
    Eigen::MatrixXd dispensed;    // kg per hour and trailer
    Eigen::VectorXd trailer_end;  // kg per trailer at the end of the day
    double overflow_kg = 0.0;     // produced but could not be dispensed
    // Hours whose activated consumption fell strictly between zero and min
    // load; the unit is held at standby for them.
    int physical_violation_hours = 0;
};

struct ExPostResult {
    std::string label;
    Variation variation = Variation::NoAS;
    double day_ahead_objective = 0.0;
    BidSchedule bids;
    ProfitBreakdown breakdown;
    double profit = 0.0;
    Redispatch realized;
    double unmet_demand_kg = 0.0;
    Mask activated_up;
    int activated_hours = 0;  // activated and with a nonzero upward bid
    MilpSolution solution;
};

/// 1 where the regulation bid mean_efficiency * hydrogen price is at or below
/// the balancing price and the system is short.
Mask realized_activation(const ElectrolyzerSpec& spec, const HydrogenContract& contract, const RealizedDay& day);

/// Physical operation under fixed bids. Unactivated hours reproduce the
/// scheduled values exactly. Throws ContractViolation on inconsistent bids.
Redispatch redispatch(const BidSchedule& bids, const DayInstance& inst, const Mask& activated_up,
                      const Mask& activated_dn);

ExPostResult settle(const BidSchedule& bids, const DayInstance& inst, const RealizedDay& day,
                    const Mask& activated_up, Redispatch realized);

class DayFailure : public std::runtime_error {
public:
    DayFailure(const std::string& label, Variation v, MilpStatus status);
    std::string label;
    Variation variation;
    MilpStatus status;
};

/// Alpha vectors the day-ahead problem of `v` is solved with.
void apply_variation(Variation v, DayInstance& inst, const RealizedDay& day, const Mask& activated_up);

struct PreparedDay {
    DayInstance instance;  // alphas set for the variation
    DayModel model;        // reserves fixed to zero for NoAS
    Mask activated_up;
};

PreparedDay prepare_variation(Variation v, const DayInstance& inst_template, const RealizedDay& day,
                              const ModelOptions& options = {});

/// Solve the day-ahead problem of `v`, then redispatch and settle against
/// `day`. Throws DayFailure when the solver does not prove optimality.
/// `before_solve`, when set, sees the model first (used to dump it).
ExPostResult run_variation(Variation v, const DayInstance& inst_template, const RealizedDay& day,
                           const SolverConfig& config = {}, const ModelOptions& options = {},
                           const std::function<void(const PreparedDay&)>& before_solve = {});

}  // namespace h2bid
