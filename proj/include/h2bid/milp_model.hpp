// Sparse mixed-binary linear program in maximization form.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace h2bid {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation : std::uint8_t { LessEqual, Equal, GreaterEqual };

/// Which constraint family produced a row. `Generic` is for hand-built models.
enum class RowFamily : std::uint8_t {
    Generic,
    SegmentBounds,
    OneSegment,
    ProductionCurve,
    TotalPower,
    OnlineState,
    StandbyPower,
    MinDownTime,
    OneState,
    DayAheadBid,
    DownReserveHeadroom,
    UpReserveHeadroom,
    FcrBidSize,
    MfrrDownBidSize,
    MfrrUpBidSize,
    ActUpPower,
    ActUpSegmentBounds,
    ActUpOneSegment,
    ActUpProduction,
    ActUpMinDemand,
    ActDownPower,
    ActDownSegmentBounds,
    ActDownOneSegment,
    ActDownProduction,
    ActDownDispatch,
    DispenserCapacity,
    TrailerFillStart,
    TrailerFillBalance,
    TrailerCapacity,
    ScheduledMinDemand,
    ActUpOrdering,
    ActDownOrdering,
    Count_
};

const char* to_string(RowFamily family);

struct Term {
    int col;
    double coef;
};

struct LinearRow {
    std::vector<Term> terms;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
    RowFamily family = RowFamily::Generic;
};

/// Binaries of which at most one is 1; member k is meant to be chosen when
/// `expression` lies in [lo[k], hi[k]] and none when it is zero. A rounding
/// hint for the search, not a constraint.
struct SelectionGroup {
    std::vector<int> members;
    std::vector<double> lo, hi;
    std::vector<Term> expression;
};

struct MilpModel {
    Eigen::VectorXd objective;  // maximized
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    std::vector<bool> binary;
    std::vector<std::string> names;
    std::vector<LinearRow> rows;
    std::vector<SelectionGroup> selection_groups;

    MilpModel() = default;
    explicit MilpModel(int num_vars);

    int num_vars() const { return static_cast<int>(objective.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }
    int num_binaries() const;

    void set_column(int col, double lo, double hi, double obj = 0.0, bool is_binary = false);
    void set_binary(int col, double obj = 0.0) { set_column(col, 0.0, 1.0, obj, true); }
    int add_row(std::vector<Term> terms, Relation relation, double rhs,
                RowFamily family = RowFamily::Generic);

    double evaluate_objective(const Eigen::VectorXd& x) const { return objective.dot(x); }
    /// Signed amount by which row `r` is violated at `x` (0 when satisfied).
    double row_violation(int r, const Eigen::VectorXd& x) const;
    double max_row_violation(const Eigen::VectorXd& x) const;
    double max_bound_violation(const Eigen::VectorXd& x) const;
    double max_integrality_violation(const Eigen::VectorXd& x) const;

    /// Empty when every row references valid columns and binaries are [0, 1]-bounded
    /// (or fixed within it).
    std::vector<std::string> structural_issues() const;
};

}  // namespace h2bid
