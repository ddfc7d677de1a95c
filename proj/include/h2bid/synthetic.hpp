// Seeded synthetic price archives in the hourly/block CSV layout read by
// load_archive. Used for fixtures, demos and tests; not a market model.

#pragma once

#include <cstdint>
#include <string>

namespace h2bid {

enum class MarketRegime {
    Moderate,  // day-ahead around 60 EUR/MWh, modest reserve prices
    HighFcr,   // high day-ahead level with FCR prices high relative to it
};

struct SyntheticOptions {
    std::uint64_t seed = 1;
    int days = 3;
    std::string start_date = "2022-01-01";
    MarketRegime regime = MarketRegime::Moderate;
    // probability that an hour has a short system
    double short_probability = 0.45;
    bool include_mfrr_dn = true;
};

struct SyntheticArchive {
    std::string hourly_csv;
    std::string fcr_csv;
};

SyntheticArchive generate_archive(const SyntheticOptions& options);

/// ISO date `days` after `date`.
std::string add_days(const std::string& date, int days);

}  // namespace h2bid
