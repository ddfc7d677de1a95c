#include "h2bid/pipeline.hpp"

#include "h2bid/lp_format.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace h2bid {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

DayRecord make_record(const std::string& date, const ExPostResult& r, const MarketStructure& market) {
    DayRecord rec;
    rec.date = date;
    rec.variation = r.variation;
    rec.day_ahead_objective = r.day_ahead_objective;
    rec.breakdown = r.breakdown;
    rec.profit = r.profit;
    rec.hydrogen_kg = sum_in_order(r.realized.hydrogen);
    rec.unmet_demand_kg = r.unmet_demand_kg;
    rec.overflow_kg = r.realized.overflow_kg;
    rec.activated_hours = r.activated_hours;
    rec.physical_violation_hours = r.realized.physical_violation_hours;
    rec.fcr_capacity_mwh = r.bids.p_fcr.sum() * market.fcr_block_hours;
    rec.mfrr_up_capacity_mwh = r.bids.p_mfrr_up.sum() * market.time_step;
    rec.mfrr_dn_capacity_mwh = r.bids.p_mfrr_dn.sum() * market.time_step;
    rec.nodes = r.solution.nodes;
    return rec;
}

std::string slurp_or_empty(const fs::path& path) {
    if (path.empty()) return {};
    std::ifstream in(path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

std::string config_hash(const RunConfig& config) {
    std::string text = canonical_config(config);
    for (const fs::path& p : {config.prices, config.fcr_blocks}) {
        text += '\n';
        text += slurp_or_empty(p);
    }
    return fnv1a_hex(text);
}

VariationTotals sum_records(const std::vector<DayRecord>& records, Variation v) {
    VariationTotals t;
    for (const DayRecord& r : records) {
        if (r.variation != v) continue;
        if (r.failed) {
            t.failed_days.push_back(r.date);
            continue;
        }
        ++t.days_ok;
        t.breakdown.hydrogen += r.breakdown.hydrogen;
        t.breakdown.fcr += r.breakdown.fcr;
        t.breakdown.mfrr += r.breakdown.mfrr;
        t.breakdown.da_cost += r.breakdown.da_cost;
        t.breakdown.activation += r.breakdown.activation;
        t.profit += r.profit;
        t.hydrogen_kg += r.hydrogen_kg;
        t.unmet_demand_kg += r.unmet_demand_kg;
        t.overflow_kg += r.overflow_kg;
        t.activated_hours += r.activated_hours;
        t.physical_violation_hours += r.physical_violation_hours;
        t.fcr_capacity_mwh += r.fcr_capacity_mwh;
        t.mfrr_up_capacity_mwh += r.mfrr_up_capacity_mwh;
        t.mfrr_dn_capacity_mwh += r.mfrr_dn_capacity_mwh;
    }
    return t;
}

RunReport run_sweep(const RunConfig& config, const PriceArchive& archive, const SweepOptions& options) {
    RunReport report;
    report.dates = select_dates(archive, config);
    if (report.dates.empty()) throw DataError(config.prices.string(), 0, "no archive dates in the configured range");
    report.variations = config.variations;
    report.config_hash = config_hash(config);
    report.canonical_config = canonical_config(config);
    report.data_files.push_back(config.prices.filename().string());
    if (!config.fcr_blocks.empty()) report.data_files.push_back(config.fcr_blocks.filename().string());
    report.rejected = archive.rejected;

    const std::size_t V = config.variations.size();
    const std::size_t tasks = report.dates.size() * V;
    report.records.resize(tasks);
    if (!options.dump_lp_dir.empty()) fs::create_directories(options.dump_lp_dir);

    std::vector<MaterializedDay> days;
    days.reserve(report.dates.size());
    for (const auto& date : report.dates) days.push_back(materialize_day(archive, config, date));

    const ModelOptions model_options = config.model_options();
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::mutex log_mutex;

    auto work = [&] {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= tasks || stop.load()) return;
            const std::size_t d = k / V;
            const Variation v = config.variations[k % V];
            const std::string& date = report.dates[d];
            DayRecord& rec = report.records[k];
            try {
                std::function<void(const PreparedDay&)> dump;
                if (!options.dump_lp_dir.empty()) {
                    dump = [&](const PreparedDay& p) {
                        std::ofstream out(options.dump_lp_dir / (date + "_" + to_string(v) + ".lp"));
                        write_lp(out, p.model.milp);
                    };
                }
                const ExPostResult r =
                    run_variation(v, days[d].instance, days[d].realized, config.solver, model_options, dump);
                rec = make_record(date, r, config.market);
            } catch (const std::exception& e) {
                rec = DayRecord{};
                rec.date = date;
                rec.variation = v;
                rec.failed = true;
                rec.failure = e.what();
                if (!options.keep_going) stop.store(true);
            }
            if (options.log) {
                std::lock_guard lock(log_mutex);
                *options.log << date << ' ' << to_string(v) << ' '
                             << (rec.failed ? "FAILED: " + rec.failure
                                        : "profit=" + format_double(rec.profit) + " nodes=" + std::to_string(rec.nodes))
                             << '\n';
            }
        }
    };

    const int threads = std::max(1, options.threads);
    if (threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    if (!options.keep_going) {
        for (std::size_t k = 0; k < tasks; ++k) {
            const DayRecord& rec = report.records[k];
            if (rec.failed) throw SweepFailure("day " + rec.date + " (" + to_string(rec.variation) + "): " + rec.failure);
        }
    }
    for (Variation v : config.variations) report.totals[v] = sum_records(report.records, v);
    return report;
}

namespace {

ojson breakdown_json(const ProfitBreakdown& b) {
    return ojson{{"hydrogen_revenue", b.hydrogen},
                 {"fcr_revenue", b.fcr},
                 {"mfrr_revenue", b.mfrr},
                 {"da_cost", b.da_cost},
                 {"activation_settlement", b.activation}};
}

}  // namespace

std::string report_json(const RunReport& report, const std::string& timestamp) {
    ojson j;
    j["generated_at"] = timestamp;
    ojson prov;
    prov["config_hash"] = report.config_hash;
    prov["data_files"] = report.data_files;
    prov["config"] = ojson::parse(report.canonical_config);
    ojson rejected = ojson::array();
    for (const auto& r : report.rejected) rejected.push_back({{"date", r.date}, {"reason", r.reason}});
    prov["rejected_dates"] = rejected;
    j["provenance"] = prov;
    j["dates"] = report.dates;

    ojson totals = ojson::object();
    for (Variation v : report.variations) {
        const VariationTotals& t = report.totals.at(v);
        ojson o = breakdown_json(t.breakdown);
        o["profit"] = t.profit;
        o["hydrogen_kg"] = t.hydrogen_kg;
        o["unmet_demand_kg"] = t.unmet_demand_kg;
        o["overflow_kg"] = t.overflow_kg;
        o["activated_hours"] = t.activated_hours;
        o["physical_violation_hours"] = t.physical_violation_hours;
        o["fcr_capacity_mwh"] = t.fcr_capacity_mwh;
        o["mfrr_up_capacity_mwh"] = t.mfrr_up_capacity_mwh;
        o["mfrr_dn_capacity_mwh"] = t.mfrr_dn_capacity_mwh;
        o["days_ok"] = t.days_ok;
        o["failed_days"] = t.failed_days;
        totals[to_string(v)] = o;
    }
    j["totals"] = totals;

    ojson records = ojson::array();
    for (const DayRecord& r : report.records) {
        ojson o;
        o["date"] = r.date;
        o["variation"] = to_string(r.variation);
        o["status"] = r.failed ? "failed" : "ok";
        if (r.failed) {
            o["failure"] = r.failure;
        } else {
            o["day_ahead_objective"] = r.day_ahead_objective;
            o.update(breakdown_json(r.breakdown));
            o["profit"] = r.profit;
            o["hydrogen_kg"] = r.hydrogen_kg;
            o["unmet_demand_kg"] = r.unmet_demand_kg;
            o["overflow_kg"] = r.overflow_kg;
            o["activated_hours"] = r.activated_hours;
            o["physical_violation_hours"] = r.physical_violation_hours;
            o["fcr_capacity_mwh"] = r.fcr_capacity_mwh;
            o["mfrr_up_capacity_mwh"] = r.mfrr_up_capacity_mwh;
            o["mfrr_dn_capacity_mwh"] = r.mfrr_dn_capacity_mwh;
            o["nodes"] = r.nodes;
        }
        records.push_back(std::move(o));
    }
    j["days"] = records;
    return j.dump(2) + "\n";
}

std::string days_csv(const RunReport& report) {
    std::ostringstream out;
    out << "date,variation,status,day_ahead_objective,hydrogen_revenue,fcr_revenue,mfrr_revenue,da_cost,"
           "activation_settlement,profit,hydrogen_kg,unmet_demand_kg,overflow_kg,activated_hours,"
           "physical_violation_hours,fcr_capacity_mwh,mfrr_up_capacity_mwh,mfrr_dn_capacity_mwh,nodes\n";
    for (const DayRecord& r : report.records) {
        out << r.date << ',' << to_string(r.variation) << ',' << (r.failed ? "failed" : "ok");
        const auto f = format_double;
        out << ',' << f(r.day_ahead_objective) << ',' << f(r.breakdown.hydrogen) << ',' << f(r.breakdown.fcr) << ','
            << f(r.breakdown.mfrr) << ',' << f(r.breakdown.da_cost) << ',' << f(r.breakdown.activation) << ','
            << f(r.profit) << ',' << f(r.hydrogen_kg) << ',' << f(r.unmet_demand_kg) << ',' << f(r.overflow_kg) << ','
            << r.activated_hours << ',' << r.physical_violation_hours << ',' << f(r.fcr_capacity_mwh) << ','
            << f(r.mfrr_up_capacity_mwh) << ',' << f(r.mfrr_dn_capacity_mwh) << ',' << r.nodes << '\n';
    }
    return out.str();
}

std::string cumulative_csv(const RunReport& report, Variation v) {
    std::ostringstream out;
    out << "date,failed,profit,cumulative_profit,cumulative_fcr_mwh,cumulative_mfrr_up_mwh,cumulative_mfrr_dn_mwh,"
           "cumulative_unmet_demand_kg\n";
    double profit = 0.0, fcr = 0.0, up = 0.0, dn = 0.0, unmet = 0.0;
    for (const DayRecord& r : report.records) {
        if (r.variation != v) continue;
        if (!r.failed) {
            profit += r.profit;
            fcr += r.fcr_capacity_mwh;
            up += r.mfrr_up_capacity_mwh;
            dn += r.mfrr_dn_capacity_mwh;
            unmet += r.unmet_demand_kg;
        }
        out << r.date << ',' << (r.failed ? 1 : 0) << ',' << format_double(r.failed ? 0.0 : r.profit) << ','
            << format_double(profit) << ',' << format_double(fcr) << ',' << format_double(up) << ','
            << format_double(dn) << ',' << format_double(unmet) << '\n';
    }
    return out.str();
}

void write_report(const RunReport& report, const fs::path& out_dir, const std::string& timestamp) {
    fs::create_directories(out_dir);
    auto put = [&](const std::string& name, const std::string& text) {
        std::ofstream f(out_dir / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (out_dir / name).string());
        f << text;
    };
    put("report.json", report_json(report, timestamp));
    put("days.csv", days_csv(report));
    for (Variation v : report.variations) put(std::string("cumulative_") + to_string(v) + ".csv", cumulative_csv(report, v));
}

// -- comparison -----------------------------------------------------------------

namespace {

struct LoadedReport {
    std::string name;
    std::vector<std::string> dates;
    std::vector<std::string> variations;
    std::map<std::string, std::map<std::string, double>> metrics;  // variation -> metric -> value
};

const char* const kMetrics[] = {"profit", "hydrogen_revenue", "fcr_revenue", "mfrr_revenue", "da_cost",
                                "activation_settlement", "unmet_demand_kg"};

LoadedReport load_report(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open report " + path.string());
    ojson j;
    try {
        j = ojson::parse(in);
    } catch (const ojson::exception& e) {
        throw std::invalid_argument("report " + path.string() + " is not valid JSON");
    }
    LoadedReport r;
    r.name = path.parent_path().filename().string();
    if (r.name.empty()) r.name = path.string();
    r.dates = j.at("dates").get<std::vector<std::string>>();
    for (const auto& [variation, totals] : j.at("totals").items()) {
        r.variations.push_back(variation);
        for (const char* m : kMetrics) r.metrics[variation][m] = totals.at(m).get<double>();
    }
    return r;
}

}  // namespace

std::vector<ComparisonRow> compare_reports(const std::vector<fs::path>& paths) {
    if (paths.size() < 2) throw std::invalid_argument("compare needs at least two reports");
    std::vector<LoadedReport> reports;
    for (const auto& p : paths) reports.push_back(load_report(p));
    const LoadedReport& base = reports.front();
    for (std::size_t i = 1; i < reports.size(); ++i) {
        if (reports[i].dates != base.dates) {
            throw std::invalid_argument("date ranges differ: " + base.name + " vs " + reports[i].name);
        }
    }
    // Same directory name twice (e.g. a report against itself) still needs
    // distinguishable labels.
    for (std::size_t i = 0; i < reports.size(); ++i) reports[i].name = "#" + std::to_string(i + 1) + ":" + reports[i].name;

    const bool single = std::all_of(reports.begin(), reports.end(),
                                    [](const LoadedReport& r) { return r.variations.size() == 1; });
    std::vector<ComparisonRow> rows;
    auto emit = [&](const LoadedReport& a, const std::string& va, const LoadedReport& b, const std::string& vb) {
        for (const char* m : kMetrics) {
            ComparisonRow row;
            row.baseline = a.name + ":" + va;
            row.candidate = b.name + ":" + vb;
            row.metric = m;
            row.baseline_value = a.metrics.at(va).at(m);
            row.candidate_value = b.metrics.at(vb).at(m);
            row.ratio = row.baseline_value == 0.0 ? std::nan("") : row.candidate_value / row.baseline_value;
            row.difference = row.candidate_value - row.baseline_value;
            rows.push_back(std::move(row));
        }
    };
    for (std::size_t i = 1; i < reports.size(); ++i) {
        const LoadedReport& other = reports[i];
        if (single) {
            emit(base, base.variations.front(), other, other.variations.front());
            continue;
        }
        bool any = false;
        for (const auto& v : base.variations) {
            if (!other.metrics.count(v)) continue;
            emit(base, v, other, v);
            any = true;
        }
        if (!any) throw std::invalid_argument("no common variation between " + base.name + " and " + other.name);
    }
    return rows;
}

void print_comparison(std::ostream& out, const std::vector<ComparisonRow>& rows) {
    out << "baseline,candidate,metric,baseline_value,candidate_value,ratio,difference\n";
    for (const auto& r : rows) {
        out << r.baseline << ',' << r.candidate << ',' << r.metric << ',' << format_double(r.baseline_value) << ','
            << format_double(r.candidate_value) << ',' << (std::isnan(r.ratio) ? "nan" : format_double(r.ratio)) << ','
            << format_double(r.difference) << '\n';
    }
}

}  // namespace h2bid
