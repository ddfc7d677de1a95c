// Multi-day sweep over dates and variations, report assembly and report
// comparison.

#pragma once

#include "h2bid/expost.hpp"
#include "h2bid/ingest.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace h2bid {

struct DayRecord {
    std::string date;
    Variation variation = Variation::NoAS;
    bool failed = false;
    std::string failure;
    double day_ahead_objective = 0.0;
    ProfitBreakdown breakdown;
    double profit = 0.0;
    double hydrogen_kg = 0.0;
    double unmet_demand_kg = 0.0;
    double overflow_kg = 0.0;
    int activated_hours = 0;
    int physical_violation_hours = 0;
    // offered capacity in MW times hours held
    double fcr_capacity_mwh = 0.0;
    double mfrr_up_capacity_mwh = 0.0;
    double mfrr_dn_capacity_mwh = 0.0;
    long nodes = 0;
};

struct VariationTotals {
    ProfitBreakdown breakdown;
    double profit = 0.0;
    double hydrogen_kg = 0.0;
    double unmet_demand_kg = 0.0;
    double overflow_kg = 0.0;
    int activated_hours = 0;
    int physical_violation_hours = 0;
    double fcr_capacity_mwh = 0.0;
    double mfrr_up_capacity_mwh = 0.0;
    double mfrr_dn_capacity_mwh = 0.0;
    int days_ok = 0;
    std::vector<std::string> failed_days;
};

struct RunReport {
    std::vector<std::string> dates;
    std::vector<Variation> variations;
    // ordered by date, then by variation in `variations` order
    std::vector<DayRecord> records;
    std::map<Variation, VariationTotals> totals;
    std::string config_hash;
    std::string canonical_config;
    std::vector<std::string> data_files;
    std::vector<RejectedDate> rejected;
};

struct SweepOptions {
    int threads = 1;
    bool keep_going = false;
    // when set, every day model is written there as CPLEX-LP before solving
    std::filesystem::path dump_lp_dir;
    std::ostream* log = nullptr;
};

/// Raised without --keep-going on the first failed day (in date order).
class SweepFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

RunReport run_sweep(const RunConfig& config, const PriceArchive& archive, const SweepOptions& options = {});

VariationTotals sum_records(const std::vector<DayRecord>& records, Variation v);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& bytes);

/// Config hash over the canonical config text and the contents of the data files.
std::string config_hash(const RunConfig& config);

/// report.json, days.csv and cumulative_<variation>.csv in `out_dir`.
void write_report(const RunReport& report, const std::filesystem::path& out_dir, const std::string& timestamp);

std::string report_json(const RunReport& report, const std::string& timestamp);
std::string days_csv(const RunReport& report);
std::string cumulative_csv(const RunReport& report, Variation v);

struct ComparisonRow {
    std::string baseline;   // "<report>:<variation>"
    std::string candidate;
    std::string metric;
    double baseline_value = 0.0;
    double candidate_value = 0.0;
    double ratio = 0.0;  // candidate / baseline; NaN when baseline is 0
    double difference = 0.0;
};

/// Compares the first report with every other one. Reports holding a single
/// variation each are compared with each other directly; otherwise series are
/// matched by variation. Throws std::invalid_argument on mismatched dates.
std::vector<ComparisonRow> compare_reports(const std::vector<std::filesystem::path>& reports);
void print_comparison(std::ostream& out, const std::vector<ComparisonRow>& rows);

}  // namespace h2bid
