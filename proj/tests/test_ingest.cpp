#include "oracles.hpp"

#include "h2bid/ingest.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

using namespace h2bid;
namespace fs = std::filesystem;

namespace {

struct Csv {
    std::string hourly = "date,hour,da_price,mfrr_up_price,mfrr_dn_price,balancing_price,imbalance\n";
    std::string blocks = "date,block,fcr_price\n";
};

// `days` complete dates starting 2022-03-0<1..>, hour h priced 40 + h.
Csv make_csv(int days) {
    Csv c;
    for (int d = 1; d <= days; ++d) {
        const std::string date = "2022-03-0" + std::to_string(d);
        for (int h = 0; h < 24; ++h)
            c.hourly += date + "," + std::to_string(h) + "," + std::to_string(40 + h) + ".5,3.25,1.1,120,-5\n";
        for (int b = 0; b < 6; ++b) c.blocks += date + "," + std::to_string(b) + "," + std::to_string(10 + b) + ".75\n";
    }
    return c;
}

ArchiveOptions lenient() {
    ArchiveOptions o;
    o.max_rejected_fraction = 1.0;
    return o;
}

bool rejected_with(const PriceArchive& a, const std::string& date, const std::string& text) {
    for (const auto& r : a.rejected)
        if (r.date == date && r.reason.find(text) != std::string::npos) return true;
    return false;
}

fs::path temp_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("h2bid_ingest_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

nlohmann::json sample_config() {
    std::ifstream in(oracle::data_dir() / "sample" / "config.json");
    return nlohmann::json::parse(in);
}

RunConfig parse(const nlohmann::json& j) { return parse_config(j.dump(), oracle::data_dir() / "sample"); }

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("sample archive loads three complete dates") {
    const fs::path dir = oracle::data_dir() / "sample";
    const PriceArchive a = load_archive(dir / "prices.csv", dir / "fcr.csv");
    CHECK(a.dates() == std::vector<std::string>{"2022-01-01", "2022-01-02", "2022-01-03"});
    CHECK(a.hourly_rows() == 72);
    CHECK(a.block_rows() == 18);
    CHECK(a.rejected.empty());
    CHECK(a.zone == "DK1");
}

TEST_CASE("hour 24 rejects the date") {
    Csv c = make_csv(3);
    c.hourly += "2022-03-02,24,1,1,1,1,1\n";
    const PriceArchive a = parse_archive(c.hourly, c.blocks, lenient());
    CHECK(rejected_with(a, "2022-03-02", "invalid hour"));
    CHECK(a.days.size() == 2);
}

TEST_CASE("too many rejected dates is a hard error") {
    Csv c = make_csv(3);
    c.hourly += "2022-03-02,24,1,1,1,1,1\n";
    CHECK_THROWS_WITH_AS(parse_archive(c.hourly, c.blocks), doctest::Contains("dates rejected"), DataError);
}

TEST_CASE("hourly FCR prices must agree within a block") {
    std::string hourly = "date,hour,da_price,mfrr_up_price,mfrr_dn_price,balancing_price,imbalance,fcr_price\n";
    for (int d : {1, 2})
        for (int h = 0; h < 24; ++h) {
            const std::string fcr = (d == 2 && h == 6) ? "99" : std::to_string(10 + h / 4);
            hourly += "2022-03-0" + std::to_string(d) + "," + std::to_string(h) + ",50,3,1,100,-1," + fcr + "\n";
        }
    const PriceArchive a = parse_archive(hourly, "", lenient());
    CHECK(rejected_with(a, "2022-03-02", "FCR hours disagree in block 1"));
    REQUIRE(a.days.count("2022-03-01") == 1);
    CHECK(a.days.at("2022-03-01").fcr[2].value == 12.0);
}

TEST_CASE("malformed cell names file and line") {
    Csv c = make_csv(1);
    const auto pos = c.hourly.find("3.25");
    c.hourly.replace(pos, 4, "3.2x");
    try {
        parse_archive(c.hourly, c.blocks, {}, "prices.csv", "fcr.csv");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(e.file == "prices.csv");
        CHECK(e.line == 2);
        CHECK(std::string(e.what()).find("malformed number") != std::string::npos);
    }
    Csv bad_date = make_csv(1);
    bad_date.hourly += "03/01/2022,0,1,1,1,1,1\n";
    CHECK_THROWS_AS(parse_archive(bad_date.hourly, bad_date.blocks), DataError);
}

TEST_CASE("missing downward mFRR prices default to zero with a warning") {
    Csv c = make_csv(1);
    std::string hourly = "date,hour,da_price,mfrr_up_price,balancing_price,imbalance\n";
    for (int h = 0; h < 24; ++h) hourly += "2022-03-01," + std::to_string(h) + ",50,3,100,-1\n";
    const PriceArchive a = parse_archive(hourly, c.blocks);
    REQUIRE(a.days.size() == 1);
    for (const auto& cell : a.days.begin()->second.mfrr_dn) CHECK(cell.value == 0.0);
    CHECK(a.warnings.size() == 1);

    Csv empty_cell = make_csv(1);
    const auto pos = empty_cell.hourly.find(",1.1,");
    empty_cell.hourly.replace(pos, 5, ",,");
    const PriceArchive b = parse_archive(empty_cell.hourly, empty_cell.blocks);
    CHECK(b.days.begin()->second.mfrr_dn[0].value == 0.0);
    CHECK(b.days.begin()->second.mfrr_dn[1].value == 1.1);
    CHECK_FALSE(b.warnings.empty());
}

TEST_CASE("daylight-saving dates are rejected") {
    Csv c = make_csv(3);
    std::string hourly;
    std::istringstream in(c.hourly);
    for (std::string line; std::getline(in, line);)
        if (line.rfind("2022-03-03,2,", 0) != 0) hourly += line + "\n";  // 23-hour day
    const PriceArchive a = parse_archive(hourly, c.blocks, lenient());
    CHECK(rejected_with(a, "2022-03-03", "daylight-saving"));
}

TEST_CASE("row order does not matter") {
    const Csv c = make_csv(3);
    std::vector<std::string> lines;
    std::istringstream in(c.hourly);
    std::string header;
    std::getline(in, header);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    std::reverse(lines.begin(), lines.end());
    std::string shuffled = header + "\n";
    for (const auto& l : lines) shuffled += l + "\n";
    const PriceArchive a = parse_archive(c.hourly, c.blocks), b = parse_archive(shuffled, c.blocks);
    REQUIRE(a.dates() == b.dates());
    for (const auto& date : a.dates())
        for (int h = 0; h < 24; ++h) CHECK(a.days.at(date).da[h].text == b.days.at(date).da[h].text);
}

TEST_CASE("price text round-trips") {
    const Csv c = make_csv(1);
    const PriceArchive a = parse_archive(c.hourly, c.blocks);
    const ArchiveDay& d = a.days.begin()->second;
    CHECK(d.da[7].text == "47.5");
    CHECK(d.fcr[5].text == "15.75");
    for (double v : {0.1, 47.5, -3.0e-5, 1.0 / 3.0, 123456.789}) CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("materialized day passes prices through") {
    const Csv c = make_csv(2);
    const PriceArchive a = parse_archive(c.hourly, c.blocks);
    RunConfig cfg;
    const MaterializedDay m = materialize_day(a, cfg, "2022-03-02", Variation::AlphaOne);
    CHECK(m.instance.fcr_prices[1] == 11.75);
    CHECK(m.instance.da_prices[23] == 63.5);
    CHECK(m.instance.alpha_up.isOnes());
    CHECK(m.instance.alpha_dn.isOnes());
    CHECK(m.realized.system_short.all());
    CHECK(validate_instance(m.instance).empty());
    const MaterializedDay z = materialize_day(a, cfg, "2022-03-02", Variation::AlphaZero);
    CHECK(z.instance.alpha_up.isZero());
    CHECK_THROWS_AS(materialize_day(a, cfg, "2022-04-01"), std::out_of_range);
}

TEST_CASE("sample config parses") {
    const RunConfig cfg = load_config(oracle::data_dir() / "sample" / "config.json");
    CHECK(cfg.contract.trailers.size() == 3);
    CHECK(cfg.contract.min_daily_demand == 2000.0);
    CHECK(cfg.variations.size() == 4);
    CHECK(cfg.solver.branching == BranchRule::PseudoCost);
    CHECK(cfg.spec.mean_efficiency > 0.0);
    CHECK(fs::exists(cfg.prices));
    const PriceArchive a = load_archive(cfg.prices, cfg.fcr_blocks);
    CHECK(select_dates(a, cfg).size() == 3);
}

TEST_CASE("config errors") {
    auto j = sample_config();
    j["solver"]["colour"] = "blue";
    CHECK_THROWS_WITH_AS(parse(j), doctest::Contains("unknown key 'colour'"), ConfigError);
    j = sample_config();
    j["schema_version"] = 2;
    CHECK_THROWS_WITH_AS(parse(j), doctest::Contains("schema_version"), ConfigError);
    j = sample_config();
    j["solver"]["branching"] = "random";
    CHECK_THROWS_AS(parse(j), ConfigError);
    j = sample_config();
    j["variations"] = {"a2"};
    CHECK_THROWS_AS(parse(j), ConfigError);
    j = sample_config();
    j["dates"]["from"] = "2022-02-01";
    CHECK_THROWS_WITH_AS(parse(j), doctest::Contains("date range is empty"), ConfigError);
    j = sample_config();
    j["contract"]["trailers"][0]["to_hour"] = 25;
    CHECK_THROWS_AS(parse(j), ConfigError);
    j = sample_config();
    j["electrolyzer"]["min_load_mw"] = "one";
    CHECK_THROWS_WITH_AS(parse(j), doctest::Contains("wrong type"), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json", "."), ConfigError);
}

TEST_CASE("canonical config reflects result-relevant fields") {
    auto j = sample_config();
    const std::string base = canonical_config(parse(j));
    CHECK(canonical_config(parse(j)) == base);
    j["solver"]["dive_every"] = 3;
    CHECK(canonical_config(parse(j)) != base);
}

TEST_CASE("data directory override") {
    const fs::path dir = temp_dir("datadir");
    const Csv c = make_csv(1);
    write(dir / "prices.csv", c.hourly);
    write(dir / "fcr.csv", c.blocks);
    ::setenv("H2BID_DATA_DIR", dir.c_str(), 1);
    const RunConfig cfg = parse(sample_config());
    ::unsetenv("H2BID_DATA_DIR");
    CHECK(cfg.prices == dir / "prices.csv");
    CHECK(parse(sample_config()).prices == oracle::data_dir() / "sample" / "prices.csv");
}

TEST_CASE("curve file") {
    auto j = sample_config();
    j["electrolyzer"] = {{"curve_file", (oracle::data_dir() / "default_curve_v1.json").string()}};
    const RunConfig cfg = parse(j);
    const ElectrolyzerSpec fixture = oracle::fixture_spec();
    CHECK(cfg.spec.curve.size() == 4);
    CHECK(cfg.spec.curve.segments[2].slope == fixture.curve.segments[2].slope);
    CHECK(cfg.spec.mean_efficiency == fixture.mean_efficiency);
    j["electrolyzer"]["capacity_mw"] = 10;
    CHECK_THROWS_WITH_AS(parse(j), doctest::Contains("excludes"), ConfigError);

    const fs::path dir = temp_dir("curve");
    write(dir / "v2.json", R"({"version": 2, "capacity_mw": 10, "min_load_mw": 1, "curve": []})");
    CHECK_THROWS_WITH_AS(load_curve_fixture(dir / "v2.json"), doctest::Contains("version"), DataError);
    CHECK_THROWS_AS(load_curve_fixture(dir / "missing.json"), DataError);
}

}  // TEST_SUITE
