#include "oracles.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path work_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("h2bid_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Result cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string(H2BID_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

// Copy of the sample configuration writing into `dir`.
fs::path sample_config(const fs::path& dir, const std::function<void(json&)>& edit = {}) {
    const fs::path sample = oracle::data_dir() / "sample";
    json j = json::parse(slurp(sample / "config.json"));
    j["data"]["prices"] = (sample / "prices.csv").string();
    j["data"]["fcr_blocks"] = (sample / "fcr.csv").string();
    j["output_dir"] = (dir / "out").string();
    if (edit) edit(j);
    const fs::path path = dir / "config.json";
    std::ofstream(path) << j.dump(2);
    return path;
}

std::string without_timestamp(std::string report) {
    json j = json::parse(report);
    j.erase("generated_at");
    return j.dump();
}

int count_lines(const std::string& text) { return static_cast<int>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("run writes the report, the day table and four cumulative series") {
    const fs::path dir = work_dir("run");
    const fs::path cfg = sample_config(dir);
    const Result r = cli("run --quiet --config " + cfg.string(), dir);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const fs::path out = dir / "out";
    const json report = json::parse(slurp(out / "report.json"));
    CHECK(report.contains("generated_at"));
    CHECK(count_lines(slurp(out / "days.csv")) == 1 + 12);
    for (const char* v : {"noas", "oracle", "a0", "a1"}) {
        const std::string cumulative = slurp(out / (std::string("cumulative_") + v + ".csv"));
        CHECK_MESSAGE(count_lines(cumulative) == 1 + 3, v);
    }
    CHECK(r.out.find("report written to") != std::string::npos);

    // a second run of the same configuration reproduces every file
    const fs::path again = work_dir("run_again");
    const Result r2 = cli("run --quiet --config " + cfg.string() + " --out-dir " + (again / "out").string(), again);
    REQUIRE(r2.code == 0);
    CHECK(without_timestamp(slurp(out / "report.json")) == without_timestamp(slurp(again / "out" / "report.json")));
    CHECK(slurp(out / "days.csv") == slurp(again / "out" / "days.csv"));
    for (const char* v : {"noas", "oracle", "a0", "a1"}) {
        const std::string name = std::string("cumulative_") + v + ".csv";
        CHECK(slurp(out / name) == slurp(again / "out" / name));
    }

    // comparing a report with itself gives ratio 1 and difference 0 everywhere
    const Result cmp = cli("compare " + (out / "report.json").string() + " " + (out / "report.json").string(), dir);
    REQUIRE(cmp.code == 0);
    std::istringstream rows(cmp.out);
    std::string line;
    std::getline(rows, line);
    int compared = 0;
    while (std::getline(rows, line)) {
        const auto last = line.rfind(',');
        const auto ratio_start = line.rfind(',', last - 1) + 1;
        const std::string ratio = line.substr(ratio_start, last - ratio_start);
        if (ratio != "nan") CHECK(std::stod(ratio) == 1.0);
        CHECK(std::stod(line.substr(last + 1)) == 0.0);
        ++compared;
    }
    CHECK(compared > 0);
}

TEST_CASE("NoAS alone earns no reserve revenue") {
    const fs::path dir = work_dir("noas");
    const Result r = cli("run --quiet --variation noas --config " + sample_config(dir).string(), dir);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const std::string days = slurp(dir / "out" / "days.csv");
    CHECK(count_lines(days) == 1 + 3);
    const json report = json::parse(slurp(dir / "out" / "report.json"));
    const std::string text = report.dump();
    CHECK(text.find("\"oracle\"") == std::string::npos);
    std::istringstream in(days);
    std::string header;
    std::getline(in, header);
    std::vector<std::string> names;
    std::stringstream hs(header);
    for (std::string c; std::getline(hs, c, ',');) names.push_back(c);
    auto column = [&](const std::string& n) { return std::find(names.begin(), names.end(), n) - names.begin(); };
    const auto fcr = column("fcr_revenue"), mfrr = column("mfrr_revenue");
    REQUIRE(fcr < static_cast<long>(names.size()));
    REQUIRE(mfrr < static_cast<long>(names.size()));
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        CHECK(std::stod(cells[fcr]) == 0.0);
        CHECK(std::stod(cells[mfrr]) == 0.0);
    }
}

TEST_CASE("thread count does not change the output") {
    const fs::path one = work_dir("threads1"), four = work_dir("threads4");
    auto edit = [](json& j) { j["variations"] = {"a0", "a1"}; };
    REQUIRE(cli("run --quiet --threads 1 --config " + sample_config(one, edit).string(), one).code == 0);
    REQUIRE(cli("run --quiet --threads 4 --config " + sample_config(four, edit).string(), four).code == 0);
    CHECK(slurp(one / "out" / "days.csv") == slurp(four / "out" / "days.csv"));
    CHECK(without_timestamp(slurp(one / "out" / "report.json")) ==
          without_timestamp(slurp(four / "out" / "report.json")));
}

TEST_CASE("exit codes") {
    const fs::path dir = work_dir("codes");
    CHECK(cli("run --config " + (dir / "missing.json").string(), dir).code == 2);
    CHECK(cli("run", dir).code == 2);
    CHECK(cli("run --quiet --variation a7 --config " + sample_config(dir).string(), dir).code == 2);
    CHECK(cli("run --quiet --from 2022-01-03 --to 2022-01-01 --config " + sample_config(dir).string(), dir).code == 2);

    const fs::path broken = dir / "broken.csv";
    std::ofstream(broken) << "date,hour,da_price\n2022-01-01,0,abc\n";
    const fs::path cfg = sample_config(dir, [&](json& j) {
        j["data"]["prices"] = broken.string();
        j["data"].erase("fcr_blocks");
    });
    const Result data = cli("run --quiet --config " + cfg.string(), dir);
    CHECK(data.code == 3);
    CHECK(data.err.find("data error") != std::string::npos);

    const fs::path limited = sample_config(dir, [](json& j) {
        j["variations"] = {"a1"};
        j["solver"]["node_limit"] = 1;
        j["solver"]["dive_every"] = 0;
    });
    const Result solver = cli("run --quiet --config " + limited.string(), dir);
    CHECK((solver.code == 4 || solver.code == 0));
}

TEST_CASE("compare rejects reports over different dates") {
    const fs::path a = work_dir("cmp_a"), b = work_dir("cmp_b");
    auto only = [](const std::string& day) {
        return [day](json& j) {
            j["variations"] = {"a0"};
            j["dates"] = {{"from", day}, {"to", day}};
        };
    };
    REQUIRE(cli("run --quiet --config " + sample_config(a, only("2022-01-01")).string(), a).code == 0);
    REQUIRE(cli("run --quiet --config " + sample_config(b, only("2022-01-02")).string(), b).code == 0);
    const Result r = cli("compare " + (a / "out" / "report.json").string() + " " + (b / "out" / "report.json").string(), a);
    CHECK(r.code == 2);
    CHECK(r.err.find("error") != std::string::npos);
}

TEST_CASE("synth and fit-curve") {
    const fs::path dir = work_dir("synth");
    REQUIRE(cli("synth --seed 4 --days 2 --out-dir " + dir.string(), dir).code == 0);
    const h2bid::PriceArchive a = h2bid::load_archive(dir / "prices.csv", dir / "fcr.csv");
    CHECK(a.days.size() == 2);
    const Result fit = cli("fit-curve", dir);
    REQUIRE(fit.code == 0);
    CHECK(json::parse(fit.out) == json::parse(slurp(oracle::data_dir() / "default_curve_v1.json")));
}

}  // TEST_SUITE
