// Price archive loading and run configuration.
//
// Hourly CSV, one row per delivery hour:
//   date,hour,da_price,mfrr_up_price,mfrr_dn_price,balancing_price,imbalance[,fcr_price]
// FCR block CSV (optional when the hourly file carries fcr_price):
//   date,block,fcr_price
// Dates are ISO (YYYY-MM-DD), hours 0-23, blocks 0-5. `imbalance` is the
// system imbalance in MWh; negative means the system is short.

#pragma once

#include "h2bid/branch_and_bound.hpp"
#include "h2bid/expost.hpp"
#include "h2bid/model.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace h2bid {

/// Malformed input file or content; `line` is 0 when not tied to a row.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& file, int line, const std::string& what);
    std::string file;
    int line;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A price as written in the file plus its parsed value.
struct PriceCell {
    std::string text;
    double value = 0.0;
};

struct ArchiveDay {
    std::vector<PriceCell> da, mfrr_up, mfrr_dn, balancing, imbalance;  // 24 each
    std::vector<PriceCell> fcr;                                          // 6 blocks
};

struct RejectedDate {
    std::string date;
    std::string reason;
};

struct PriceArchive {
    std::string zone;
    std::map<std::string, ArchiveDay> days;  // ordered by ISO date
    std::vector<RejectedDate> rejected;
    std::vector<std::string> warnings;

    std::vector<std::string> dates() const;
    std::size_t hourly_rows() const { return days.size() * 24; }
    std::size_t block_rows() const { return days.size() * 6; }
};

struct ArchiveOptions {
    std::string zone = "DK1";
    // Fraction of dates that may be rejected before loading fails.
    double max_rejected_fraction = 0.10;
};

/// `fcr_path` may be empty when the hourly file has an fcr_price column.
PriceArchive load_archive(const std::filesystem::path& hourly_path, const std::filesystem::path& fcr_path = {},
                          const ArchiveOptions& options = {});

/// Same as load_archive but from in-memory CSV text; names are used in messages.
PriceArchive parse_archive(const std::string& hourly_csv, const std::string& fcr_csv,
                           const ArchiveOptions& options = {}, const std::string& hourly_name = "hourly",
                           const std::string& fcr_name = "fcr");

/// Electrolyzer from a versioned curve fixture (`h2bid fit-curve` output):
/// capacity, min load, mean efficiency and the segments; the remaining fields
/// keep their defaults. Throws DataError.
ElectrolyzerSpec load_curve_fixture(const std::filesystem::path& path);

struct RunConfig {
    int schema_version = 1;
    std::filesystem::path prices;
    std::filesystem::path fcr_blocks;  // optional
    std::string zone = "DK1";
    std::string date_from;
    std::string date_to;

    ElectrolyzerSpec spec = default_electrolyzer();
    HydrogenContract contract = default_contract();
    MarketStructure market;
    std::vector<Variation> variations{std::begin(kAllVariations), std::end(kAllVariations)};
    SolverConfig solver;
    bool strict_paper = false;
    std::filesystem::path output_dir = "out";

    ModelOptions model_options() const { return strict_paper ? ModelOptions::strict() : ModelOptions{}; }
};

inline constexpr int kConfigSchemaVersion = 1;

/// Reads the JSON run configuration. Relative data paths resolve against the
/// config file's directory, or against $H2BID_DATA_DIR when it is set.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);

/// Canonical JSON of every field that affects results; the config hash is
/// taken over this text.
std::string canonical_config(const RunConfig& config);

/// Dates of the archive inside [date_from, date_to] (inclusive; empty bounds
/// are open).
std::vector<std::string> select_dates(const PriceArchive& archive, const RunConfig& config);

struct MaterializedDay {
    DayInstance instance;
    RealizedDay realized;
};

/// Forecast prices equal the archived prices. Alpha vectors follow
/// `variation`; NoAS reserve fixing happens at solve time. Throws
/// std::out_of_range for an unknown date.
MaterializedDay materialize_day(const PriceArchive& archive, const RunConfig& config, const std::string& date,
                                Variation variation = Variation::AlphaZero);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

bool is_iso_date(const std::string& s);

}  // namespace h2bid
