// Builds the day-ahead bidding MILP of an electrolyzer from a DayInstance and
// reads bids back out of a solution.

#pragma once

#include "h2bid/domain.hpp"
#include "h2bid/milp_model.hpp"

#include <array>
#include <string>

namespace h2bid {

enum class VarKind : std::uint8_t {
    PowerSegment,        // p_e(t,s)
    Hydrogen,            // h_e(t)
    PowerTotal,          // p_tot(t)
    PowerStandby,        // p_sb(t)
    PowerDayAhead,       // p_da(t)
    Fcr,                 // p_fcr(i)
    MfrrUp,              // p_mfrr_up(t)
    MfrrDown,            // p_mfrr_dn(t)
    ActUpPower,          // p_act_up(t,s)
    ActDownPower,        // p_act_dn(t,s)
    ActUpHydrogen,       // h_act_up(t)
    ActDownHydrogen,     // h_act_dn(t)
    Dispensed,           // h_disp(t,d)
    TrailerFill,         // s_disp(t,d)
    SegmentOn,           // z_e(t,s)
    Online,              // z_on(t)
    Standby,             // z_sb(t)
    Off,                 // z_off(t)
    FcrOn,               // z_fcr(i)
    MfrrUpOn,            // z_m_up(t)
    MfrrDownOn,          // z_m_dn(t)
    ActUpSegmentOn,      // z_act_up(t,s)
    ActDownSegmentOn,    // z_act_dn(t,s)
    Count_
};

inline constexpr int kVarKinds = static_cast<int>(VarKind::Count_);

const char* to_string(VarKind kind);
bool is_binary_kind(VarKind kind);

/// Column of one decision variable. Unused indices are 0.
struct VarRef {
    VarKind kind;
    int t = 0;  // hour
    int s = 0;  // curve segment
    int i = 0;  // FCR block
    int d = 0;  // trailer

    friend bool operator==(const VarRef&, const VarRef&) = default;
};

/// Bijective VarRef <-> column map. Columns are grouped by kind in
/// declaration order; inside a kind they run hour-major, then segment or
/// trailer.
class VarIndex {
public:
    VarIndex() = default;
    VarIndex(int hours, int segments, int blocks, int trailers);

    int num_vars() const { return offset_[kVarKinds]; }
    int count(VarKind kind) const;
    int column(const VarRef& ref) const;
    VarRef ref(int column) const;
    std::string name(int column) const;

    int hours() const { return hours_; }
    int segments() const { return segments_; }
    int blocks() const { return blocks_; }
    int trailers() const { return trailers_; }

    // shorthands used by the builder and the read-out
    int p_e(int t, int s) const { return column({VarKind::PowerSegment, t, s}); }
    int at(VarKind kind, int t) const { return column({kind, t}); }
    int block(VarKind kind, int i) const { return column({kind, 0, 0, i}); }
    int seg(VarKind kind, int t, int s) const { return column({kind, t, s}); }
    int trailer(VarKind kind, int t, int d) const { return column({kind, t, 0, 0, d}); }

private:
    int hours_ = 0;
    int segments_ = 0;
    int blocks_ = 0;
    int trailers_ = 0;
    std::array<int, kVarKinds + 1> offset_{};
};

struct ModelOptions {
    // Scheduled production must meet the daily minimum by itself.
    bool scheduled_min_demand = true;
    // Upward headroom measured against the online state rather than "not off",
    // so a standby hour (zero consumption, no upward reserve) stays feasible.
    bool standby_aware_up_headroom = true;
    // Hour-wise rows h_act_up <= h_e - k*alpha*p_mfrr_up and
    // h_act_dn >= h_e + k*alpha*p_mfrr_dn, k the smallest slope of the curve.
    // Implied by the other rows for an increasing curve, so they only tighten
    // the relaxation. Skipped automatically when the curve is not increasing.
    bool activation_ordering = true;

    static ModelOptions strict() { return {false, false, true}; }
};

struct DayModel {
    MilpModel milp;
    VarIndex index;
    ModelOptions options;
};

/// Columns and rows of the full day problem. Throws InvalidInstance when the
/// instance does not validate.
DayModel build_model(const DayInstance& inst, const ModelOptions& options = {});

/// Fixes every FCR/mFRR capacity and its gate to zero.
void disable_reserves(DayModel& model);

class ContractViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bid schedule carried by `solution`. Throws ContractViolation when the
/// point is not integral or violates a row by more than `feas_tol`.
BidSchedule extract_bids(const DayModel& model, const DayInstance& inst,
                         const Eigen::VectorXd& solution, double feas_tol = 1e-6,
                         double int_tol = 1e-6);

}  // namespace h2bid
