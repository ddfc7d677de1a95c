#include "h2bid/synthetic.hpp"

#include "h2bid/ingest.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace h2bid {

std::string add_days(const std::string& date, int days) {
    if (!is_iso_date(date)) throw std::invalid_argument("not an ISO date: " + date);
    using namespace std::chrono;
    const year_month_day ymd{year{std::stoi(date.substr(0, 4))}, month{static_cast<unsigned>(std::stoi(date.substr(5, 2)))},
                             day{static_cast<unsigned>(std::stoi(date.substr(8, 2)))}};
    const year_month_day out{sys_days{ymd} + std::chrono::days{days}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(out.year()), static_cast<unsigned>(out.month()),
                  static_cast<unsigned>(out.day()));
    return buf;
}

namespace {

// Two decimals, as published market prices are.
std::string price(double v) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << (std::abs(v) < 0.005 ? 0.0 : v);
    return out.str();
}

}  // namespace

SyntheticArchive generate_archive(const SyntheticOptions& o) {
    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const bool high = o.regime == MarketRegime::HighFcr;
    constexpr double kPi = 3.14159265358979323846;

    std::ostringstream hourly, blocks;
    hourly << "date,hour,da_price,mfrr_up_price" << (o.include_mfrr_dn ? ",mfrr_dn_price" : "")
           << ",balancing_price,imbalance\n";
    blocks << "date,block,fcr_price\n";

    for (int d = 0; d < o.days; ++d) {
        const std::string date = add_days(o.start_date, d);
        const double level = (high ? 190.0 : 60.0) + (high ? 45.0 : 15.0) * normal(rng);
        const double swing = (high ? 60.0 : 20.0) * (0.6 + 0.4 * unit(rng));
        for (int h = 0; h < 24; ++h) {
            const double shape = -std::cos(2 * kPi * h / 24.0) * 0.6 + 0.4 * std::sin(4 * kPi * (h - 5) / 24.0);
            const double da = level + swing * shape + (high ? 18.0 : 6.0) * normal(rng);
            const double up = std::max(0.0, (high ? 12.0 : 5.0) + (high ? 6.0 : 3.0) * normal(rng));
            const double dn = std::max(0.0, (high ? 4.0 : 2.0) + 2.0 * normal(rng));
            const bool is_short = unit(rng) < o.short_probability;
            const double imbalance = (is_short ? -1.0 : 1.0) * (20.0 + 180.0 * unit(rng));
            const double spread = std::abs(normal(rng)) * (high ? 70.0 : 35.0) + (is_short ? 10.0 : 0.0);
            const double balancing = is_short ? da + spread : da - spread;
            hourly << date << ',' << h << ',' << price(da) << ',' << price(up);
            if (o.include_mfrr_dn) hourly << ',' << price(dn);
            hourly << ',' << price(balancing) << ',' << price(imbalance) << '\n';
        }
        for (int k = 0; k < 6; ++k) {
            const double fcr = high ? std::max(5.0, 45.0 + 20.0 * normal(rng)) : std::max(0.5, 9.0 + 4.0 * normal(rng));
            blocks << date << ',' << k << ',' << price(fcr) << '\n';
        }
    }
    return {hourly.str(), blocks.str()};
}

}  // namespace h2bid
