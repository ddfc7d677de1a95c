#include "h2bid/ingest.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace h2bid {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kHours = 24;
constexpr int kBlocks = 6;

std::string describe(const std::string& file, int line, const std::string& what) {
    std::ostringstream msg;
    msg << file;
    if (line > 0) msg << ':' << line;
    msg << ": " << what;
    return msg.str();
}

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return std::string(s);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::pair<int, std::vector<std::string>>> rows;  // (line number, cells)

    int column(const std::string& name) const {
        auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    }
};

CsvTable read_csv(const std::string& text, const std::string& name) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (number == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto cells = split_row(line);
        if (table.header.empty()) {
            table.header = std::move(cells);
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw DataError(name, number, "expected " + std::to_string(table.header.size()) + " fields, found " +
                                              std::to_string(cells.size()));
        }
        table.rows.emplace_back(number, std::move(cells));
    }
    if (table.header.empty()) throw DataError(name, 0, "missing header row");
    return table;
}

double parse_number(const std::string& cell, const std::string& file, int line, const std::string& column) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = first + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v))
        throw DataError(file, line, "malformed number '" + cell + "' in column " + column);
    return v;
}

int parse_int(const std::string& cell, const std::string& file, int line, const std::string& column) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
        throw DataError(file, line, "malformed integer '" + cell + "' in column " + column);
    return v;
}

struct HourRow {
    PriceCell da, mfrr_up, mfrr_dn, balancing, imbalance, fcr;
};

struct DateBuild {
    std::map<int, HourRow> hours;
    std::map<int, PriceCell> blocks;
    int hour_rows = 0;
    std::string reason;
    bool mfrr_dn_defaulted = false;

    void reject(std::string why) {
        if (reason.empty()) reason = std::move(why);
    }
};

}  // namespace

DataError::DataError(const std::string& file_, int line_, const std::string& what)
    : std::runtime_error(describe(file_, line_, what)), file(file_), line(line_) {}

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (s[i] < '0' || s[i] > '9') return false;
    const int year = std::stoi(s.substr(0, 4));
    const int month = std::stoi(s.substr(5, 2));
    const int day = std::stoi(s.substr(8, 2));
    if (month < 1 || month > 12 || day < 1) return false;
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return day <= kDays[month - 1] + (month == 2 && leap ? 1 : 0);
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::vector<std::string> PriceArchive::dates() const {
    std::vector<std::string> out;
    out.reserve(days.size());
    for (const auto& [date, _] : days) out.push_back(date);
    return out;
}

PriceArchive parse_archive(const std::string& hourly_csv, const std::string& fcr_csv, const ArchiveOptions& options,
                           const std::string& hourly_name, const std::string& fcr_name) {
    PriceArchive archive;
    archive.zone = options.zone;

    const CsvTable hourly = read_csv(hourly_csv, hourly_name);
    auto require = [&](const CsvTable& t, const std::string& file, const char* name) {
        const int c = t.column(name);
        if (c < 0) throw DataError(file, 1, std::string("missing column ") + name);
        return c;
    };
    const int c_date = require(hourly, hourly_name, "date");
    const int c_hour = require(hourly, hourly_name, "hour");
    const int c_da = require(hourly, hourly_name, "da_price");
    const int c_up = require(hourly, hourly_name, "mfrr_up_price");
    const int c_bal = require(hourly, hourly_name, "balancing_price");
    const int c_imb = require(hourly, hourly_name, "imbalance");
    const int c_dn = hourly.column("mfrr_dn_price");
    const int c_fcr = hourly.column("fcr_price");
    const bool have_block_file = !fcr_csv.empty();
    if (!have_block_file && c_fcr < 0)
        throw DataError(hourly_name, 1, "no FCR prices: give a block file or an fcr_price column");
    if (c_dn < 0) archive.warnings.push_back("mfrr_dn_price column absent; downward mFRR prices set to 0");

    std::map<std::string, DateBuild> build;
    for (const auto& [line, cells] : hourly.rows) {
        const std::string& date = cells[c_date];
        if (!is_iso_date(date)) throw DataError(hourly_name, line, "malformed date '" + date + "'");
        const int hour = parse_int(cells[c_hour], hourly_name, line, "hour");
        auto cell = [&](int c, const char* name) {
            return PriceCell{cells[c], parse_number(cells[c], hourly_name, line, name)};
        };
        HourRow row{cell(c_da, "da_price"), cell(c_up, "mfrr_up_price"), {}, cell(c_bal, "balancing_price"),
                    cell(c_imb, "imbalance"), {}};
        DateBuild& b = build[date];
        if (c_dn >= 0 && !cells[c_dn].empty()) {
            row.mfrr_dn = cell(c_dn, "mfrr_dn_price");
        } else {
            row.mfrr_dn = PriceCell{"0", 0.0};
            if (c_dn >= 0) b.mfrr_dn_defaulted = true;
        }
        if (c_fcr >= 0 && !have_block_file) row.fcr = cell(c_fcr, "fcr_price");
        ++b.hour_rows;
        if (hour < 0 || hour >= kHours) {
            b.reject("invalid hour " + std::to_string(hour));
            continue;
        }
        if (!b.hours.emplace(hour, row).second) b.reject("duplicate hour " + std::to_string(hour));
    }

    if (have_block_file) {
        const CsvTable blocks = read_csv(fcr_csv, fcr_name);
        const int b_date = require(blocks, fcr_name, "date");
        const int b_block = require(blocks, fcr_name, "block");
        const int b_price = require(blocks, fcr_name, "fcr_price");
        std::set<std::string> orphans;
        for (const auto& [line, cells] : blocks.rows) {
            const std::string& date = cells[b_date];
            if (!is_iso_date(date)) throw DataError(fcr_name, line, "malformed date '" + date + "'");
            const int block = parse_int(cells[b_block], fcr_name, line, "block");
            const PriceCell price{cells[b_price], parse_number(cells[b_price], fcr_name, line, "fcr_price")};
            auto it = build.find(date);
            if (it == build.end()) {
                orphans.insert(date);
                continue;
            }
            if (block < 0 || block >= kBlocks) {
                it->second.reject("invalid FCR block " + std::to_string(block));
                continue;
            }
            if (!it->second.blocks.emplace(block, price).second)
                it->second.reject("duplicate FCR block " + std::to_string(block));
        }
        for (const auto& date : orphans) archive.warnings.push_back("FCR prices for " + date + " without hourly rows ignored");
    }

    for (auto& [date, b] : build) {
        if (b.reason.empty() && (b.hour_rows == kHours - 1 || b.hour_rows == kHours + 1))
            b.reason = "daylight-saving day (" + std::to_string(b.hour_rows) + " hours)";
        if (b.reason.empty()) {
            for (int h = 0; h < kHours; ++h)
                if (!b.hours.count(h)) {
                    b.reject("missing hour " + std::to_string(h));
                    break;
                }
        }
        if (b.reason.empty() && have_block_file) {
            for (int k = 0; k < kBlocks; ++k)
                if (!b.blocks.count(k)) {
                    b.reject("missing FCR block " + std::to_string(k));
                    break;
                }
        }
        if (b.reason.empty() && !have_block_file) {
            // Hourly FCR prices must be constant within each block.
            for (int k = 0; k < kBlocks && b.reason.empty(); ++k) {
                const PriceCell& first = b.hours.at(4 * k).fcr;
                for (int h = 4 * k + 1; h < 4 * k + 4; ++h)
                    if (b.hours.at(h).fcr.value != first.value) {
                        b.reject("FCR hours disagree in block " + std::to_string(k));
                        break;
                    }
                b.blocks[k] = first;
            }
        }
        if (!b.reason.empty()) {
            archive.rejected.push_back({date, b.reason});
            continue;
        }
        if (b.mfrr_dn_defaulted) archive.warnings.push_back(date + ": empty mfrr_dn_price set to 0");
        ArchiveDay day;
        for (int h = 0; h < kHours; ++h) {
            const HourRow& r = b.hours.at(h);
            day.da.push_back(r.da);
            day.mfrr_up.push_back(r.mfrr_up);
            day.mfrr_dn.push_back(r.mfrr_dn);
            day.balancing.push_back(r.balancing);
            day.imbalance.push_back(r.imbalance);
        }
        for (int k = 0; k < kBlocks; ++k) day.fcr.push_back(b.blocks.at(k));
        archive.days.emplace(date, std::move(day));
    }

    const std::size_t total = build.size();
    if (total == 0) throw DataError(hourly_name, 0, "no data rows");
    if (static_cast<double>(archive.rejected.size()) > options.max_rejected_fraction * static_cast<double>(total)) {
        std::ostringstream msg;
        msg << archive.rejected.size() << " of " << total << " dates rejected (first: " << archive.rejected.front().date
            << ", " << archive.rejected.front().reason << ")";
        throw DataError(hourly_name, 0, msg.str());
    }
    return archive;
}

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path.string(), 0, "cannot open file");
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

}  // namespace

PriceArchive load_archive(const fs::path& hourly_path, const fs::path& fcr_path, const ArchiveOptions& options) {
    const std::string hourly = slurp(hourly_path);
    const std::string fcr = fcr_path.empty() ? std::string() : slurp(fcr_path);
    return parse_archive(hourly, fcr, options, hourly_path.string(), fcr_path.string());
}

ElectrolyzerSpec load_curve_fixture(const fs::path& path) {
    const std::string text = slurp(path);
    ElectrolyzerSpec spec = default_electrolyzer();
    try {
        const json j = json::parse(text);
        if (j.at("version").get<int>() != 1) throw DataError(path.string(), 0, "unsupported curve fixture version");
        spec.capacity = j.at("capacity_mw").get<double>();
        spec.min_load = j.at("min_load_mw").get<double>();
        spec.mean_efficiency = j.at("mean_efficiency_kg_per_mwh").get<double>();
        spec.curve.segments.clear();
        for (const json& s : j.at("curve"))
            spec.curve.segments.push_back({s.at("p_min").get<double>(), s.at("p_max").get<double>(),
                                           s.at("slope").get<double>(), s.at("intercept").get<double>()});
    } catch (const json::exception& e) {
        throw DataError(path.string(), 0, e.what());
    }
    if (auto issues = spec_issues(spec); !issues.empty()) throw DataError(path.string(), 0, issues.front());
    return spec;
}

// -- configuration ------------------------------------------------------------

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<T>();
}

const json& section(const json& root, const char* key) {
    static const json empty = json::object();
    if (!root.contains(key)) return empty;
    const json& s = root.at(key);
    if (!s.is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
    return s;
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config must be a JSON object");

    RunConfig cfg;
    try {
        reject_unknown(root,
                       {"schema_version", "data", "dates", "electrolyzer", "contract", "market", "variations", "solver",
                        "strict_paper", "output_dir"},
                       "config");
        read(root, "schema_version", cfg.schema_version);
        if (cfg.schema_version != kConfigSchemaVersion)
            throw ConfigError("unsupported schema_version " + std::to_string(cfg.schema_version));

        const json& data = section(root, "data");
        reject_unknown(data, {"prices", "fcr_blocks", "zone"}, "data");
        fs::path data_dir = base_dir;
        if (const char* env = std::getenv("H2BID_DATA_DIR"); env && *env) data_dir = env;
        std::string prices, fcr;
        read(data, "prices", prices);
        read(data, "fcr_blocks", fcr);
        read(data, "zone", cfg.zone);
        if (prices.empty()) throw ConfigError("data.prices is required");
        auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : data_dir / p; };
        cfg.prices = resolve(prices);
        if (!fcr.empty()) cfg.fcr_blocks = resolve(fcr);

        const json& dates = section(root, "dates");
        reject_unknown(dates, {"from", "to"}, "dates");
        read(dates, "from", cfg.date_from);
        read(dates, "to", cfg.date_to);

        const json& el = section(root, "electrolyzer");
        reject_unknown(el, {"capacity_mw", "min_load_mw", "standby_mw", "min_down_time_h", "mean_efficiency_kg_per_mwh",
                            "curve", "curve_file"},
                       "electrolyzer");
        double capacity = cfg.spec.capacity;
        read(el, "capacity_mw", capacity);
        if (capacity != cfg.spec.capacity) cfg.spec = default_electrolyzer(capacity);
        read(el, "min_load_mw", cfg.spec.min_load);
        read(el, "standby_mw", cfg.spec.standby_power);
        read(el, "min_down_time_h", cfg.spec.min_down_time);
        read(el, "mean_efficiency_kg_per_mwh", cfg.spec.mean_efficiency);
        if (el.contains("curve_file")) {
            if (el.contains("curve") || el.contains("capacity_mw"))
                throw ConfigError("electrolyzer.curve_file excludes curve and capacity_mw");
            const ElectrolyzerSpec fixture = load_curve_fixture(resolve(el.at("curve_file").get<std::string>()));
            cfg.spec.capacity = fixture.capacity;
            cfg.spec.curve = fixture.curve;
            if (!el.contains("min_load_mw")) cfg.spec.min_load = fixture.min_load;
            if (!el.contains("mean_efficiency_kg_per_mwh")) cfg.spec.mean_efficiency = fixture.mean_efficiency;
        }
        if (el.contains("curve")) {
            ProductionCurve curve;
            for (const json& s : el.at("curve")) {
                reject_unknown(s, {"p_min", "p_max", "slope", "intercept"}, "electrolyzer.curve");
                curve.segments.push_back(
                    {s.at("p_min").get<double>(), s.at("p_max").get<double>(), s.at("slope").get<double>(),
                     s.at("intercept").get<double>()});
            }
            cfg.spec.curve = std::move(curve);
            if (!el.contains("mean_efficiency_kg_per_mwh")) cfg.spec.mean_efficiency = 0.0;
        }

        const json& ct = section(root, "contract");
        reject_unknown(ct, {"hydrogen_price_eur_per_kg", "min_daily_demand_kg", "dispenser_kg_per_h", "trailers"},
                       "contract");
        read(ct, "hydrogen_price_eur_per_kg", cfg.contract.price);
        read(ct, "min_daily_demand_kg", cfg.contract.min_daily_demand);
        read(ct, "dispenser_kg_per_h", cfg.contract.dispenser_capacity);
        if (ct.contains("trailers")) {
            cfg.contract.trailers.clear();
            for (const json& tr : ct.at("trailers")) {
                reject_unknown(tr, {"capacity_kg", "from_hour", "to_hour"}, "contract.trailers");
                TrailerSlot slot;
                slot.capacity = tr.at("capacity_kg").get<double>();
                int from = 0, to = kHours;
                read(tr, "from_hour", from);
                read(tr, "to_hour", to);
                if (from < 0 || to > kHours || from >= to)
                    throw ConfigError("trailer window [" + std::to_string(from) + ", " + std::to_string(to) +
                                      ") outside the day");
                slot.available = Mask::Constant(kHours, false);
                slot.available.segment(from, to - from).setConstant(true);
                cfg.contract.trailers.push_back(std::move(slot));
            }
        }

        const json& mk = section(root, "market");
        reject_unknown(mk, {"fcr_bid_min_mw", "fcr_bid_max_mw", "mfrr_bid_min_mw", "mfrr_bid_max_mw"}, "market");
        read(mk, "fcr_bid_min_mw", cfg.market.fcr_bid_min);
        read(mk, "fcr_bid_max_mw", cfg.market.fcr_bid_max);
        read(mk, "mfrr_bid_min_mw", cfg.market.mfrr_bid_min);
        read(mk, "mfrr_bid_max_mw", cfg.market.mfrr_bid_max);

        if (root.contains("variations")) {
            cfg.variations.clear();
            for (const json& v : root.at("variations")) {
                try {
                    cfg.variations.push_back(parse_variation(v.get<std::string>()));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(e.what());
                }
            }
            if (cfg.variations.empty()) throw ConfigError("variations is empty");
        }

        const json& sv = section(root, "solver");
        reject_unknown(sv, {"gap_tol", "int_tol", "feas_tol", "node_limit", "time_limit_s", "branching", "dive_every"},
                      "solver");
        read(sv, "gap_tol", cfg.solver.gap_tol);
        read(sv, "int_tol", cfg.solver.int_tol);
        read(sv, "feas_tol", cfg.solver.feas_tol);
        read(sv, "node_limit", cfg.solver.node_limit);
        read(sv, "dive_every", cfg.solver.dive_every);
        if (sv.contains("time_limit_s") && !sv.at("time_limit_s").is_null())
            cfg.solver.time_limit = sv.at("time_limit_s").get<double>();
        if (sv.contains("branching")) {
            const std::string rule = sv.at("branching").get<std::string>();
            if (rule == "most_fractional") cfg.solver.branching = BranchRule::MostFractional;
            else if (rule == "first_fractional") cfg.solver.branching = BranchRule::FirstFractional;
            else if (rule == "pseudocost") cfg.solver.branching = BranchRule::PseudoCost;
            else throw ConfigError("unknown branching rule '" + rule + "'");
        }

        read(root, "strict_paper", cfg.strict_paper);
        std::string out_dir;
        read(root, "output_dir", out_dir);
        if (!out_dir.empty()) cfg.output_dir = fs::path(out_dir).is_absolute() ? fs::path(out_dir) : base_dir / out_dir;
        else cfg.output_dir = base_dir / "out";
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field has the wrong type: ") + e.what());
    }

    if (cfg.spec.mean_efficiency <= 0.0) {
        const double lo = cfg.spec.curve.min_power(), hi = cfg.spec.curve.max_power();
        double sum = 0.0;
        const int n = 901;
        for (int i = 0; i < n; ++i) {
            const double p = lo + (hi - lo) * i / (n - 1);
            sum += evaluate_curve(cfg.spec.curve, p) / p;
        }
        cfg.spec.mean_efficiency = sum / n;
    }

    std::vector<std::string> issues = spec_issues(cfg.spec);
    for (auto& s : contract_issues(cfg.contract, cfg.spec, kHours)) issues.push_back(std::move(s));
    for (auto& s : market_issues(cfg.market)) issues.push_back(std::move(s));
    for (auto& s : config_issues(cfg.solver)) issues.push_back(std::move(s));
    if (!cfg.date_from.empty() && !is_iso_date(cfg.date_from)) issues.push_back("dates.from is not an ISO date");
    if (!cfg.date_to.empty() && !is_iso_date(cfg.date_to)) issues.push_back("dates.to is not an ISO date");
    if (!cfg.date_from.empty() && !cfg.date_to.empty() && cfg.date_from > cfg.date_to)
        issues.push_back("date range is empty");
    if (!fs::exists(cfg.prices)) issues.push_back("price file not found: " + cfg.prices.string());
    if (!cfg.fcr_blocks.empty() && !fs::exists(cfg.fcr_blocks))
        issues.push_back("FCR block file not found: " + cfg.fcr_blocks.string());
    if (!issues.empty()) {
        std::string msg = "invalid config:";
        for (const auto& s : issues) msg += "\n  " + s;
        throw ConfigError(msg);
    }
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path());
}

std::string canonical_config(const RunConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["zone"] = c.zone;
    j["dates"] = {{"from", c.date_from}, {"to", c.date_to}};
    json curve = json::array();
    for (const auto& s : c.spec.curve.segments)
        curve.push_back({{"p_min", s.p_min}, {"p_max", s.p_max}, {"slope", s.slope}, {"intercept", s.intercept}});
    j["electrolyzer"] = {{"capacity_mw", c.spec.capacity},
                         {"min_load_mw", c.spec.min_load},
                         {"standby_mw", c.spec.standby_power},
                         {"min_down_time_h", c.spec.min_down_time},
                         {"mean_efficiency_kg_per_mwh", c.spec.mean_efficiency},
                         {"curve", curve}};
    json trailers = json::array();
    for (const auto& t : c.contract.trailers) {
        std::string window;
        for (Eigen::Index h = 0; h < t.available.size(); ++h) window += t.available[h] ? '1' : '0';
        trailers.push_back({{"capacity_kg", t.capacity}, {"available", window}});
    }
    j["contract"] = {{"hydrogen_price_eur_per_kg", c.contract.price},
                     {"min_daily_demand_kg", c.contract.min_daily_demand},
                     {"dispenser_kg_per_h", c.contract.dispenser_capacity},
                     {"trailers", trailers}};
    j["market"] = {{"fcr_bid_min_mw", c.market.fcr_bid_min},
                   {"fcr_bid_max_mw", c.market.fcr_bid_max},
                   {"mfrr_bid_min_mw", c.market.mfrr_bid_min},
                   {"mfrr_bid_max_mw", c.market.mfrr_bid_max}};
    json variations = json::array();
    for (Variation v : c.variations) variations.push_back(to_string(v));
    j["variations"] = variations;
    j["solver"] = {{"gap_tol", c.solver.gap_tol},
                   {"int_tol", c.solver.int_tol},
                   {"feas_tol", c.solver.feas_tol},
                   {"node_limit", c.solver.node_limit},
                   {"time_limit_s", c.solver.time_limit ? json(*c.solver.time_limit) : json(nullptr)},
                   {"branching", c.solver.branching == BranchRule::MostFractional    ? "most_fractional"
                                 : c.solver.branching == BranchRule::FirstFractional ? "first_fractional"
                                                                                     : "pseudocost"},
                   {"dive_every", c.solver.dive_every}};
    j["strict_paper"] = c.strict_paper;
    return j.dump();
}

std::vector<std::string> select_dates(const PriceArchive& archive, const RunConfig& config) {
    std::vector<std::string> out;
    for (const auto& [date, _] : archive.days) {
        if (!config.date_from.empty() && date < config.date_from) continue;
        if (!config.date_to.empty() && date > config.date_to) continue;
        out.push_back(date);
    }
    return out;
}

MaterializedDay materialize_day(const PriceArchive& archive, const RunConfig& config, const std::string& date,
                                Variation variation) {
    auto it = archive.days.find(date);
    if (it == archive.days.end()) throw std::out_of_range("date " + date + " not in archive");
    const ArchiveDay& a = it->second;

    auto values = [](const std::vector<PriceCell>& cells) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(cells.size()));
        for (std::size_t i = 0; i < cells.size(); ++i) v[static_cast<Eigen::Index>(i)] = cells[i].value;
        return v;
    };

    MaterializedDay out;
    DayInstance& inst = out.instance;
    inst.label = date;
    inst.spec = config.spec;
    inst.market = config.market;
    inst.contract = config.contract;
    inst.da_prices = values(a.da);
    inst.fcr_prices = values(a.fcr);
    inst.mfrr_up_prices = values(a.mfrr_up);
    inst.mfrr_dn_prices = values(a.mfrr_dn);

    RealizedDay& day = out.realized;
    day.label = date;
    day.balancing_prices = values(a.balancing);
    day.system_short = values(a.imbalance).array() < 0.0;
    day.da_prices = inst.da_prices;
    day.fcr_prices = inst.fcr_prices;
    day.mfrr_up_prices = inst.mfrr_up_prices;
    day.mfrr_dn_prices = inst.mfrr_dn_prices;
    day.activated_dn = Mask::Constant(kHours, false);

    apply_variation(variation, inst, day, realized_activation(inst.spec, inst.contract, day));
    return out;
}

}  // namespace h2bid
