// CPLEX-LP text export of a MilpModel.

#pragma once

#include "h2bid/milp_model.hpp"

#include <iosfwd>

namespace h2bid {

/// One constraint per line, preceded by a `\ family` comment whenever the row
/// family changes. Column names are taken from `model.names` and must be valid
/// LP identifiers.
void write_lp(std::ostream& out, const MilpModel& model);

}  // namespace h2bid
