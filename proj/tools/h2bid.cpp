// h2bid command line: run the ex-post sweep, compare reports, print the
// default production curve.

#include "h2bid/pipeline.hpp"
#include "h2bid/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>

namespace {

enum Exit { kOk = 0, kConfig = 2, kData = 3, kSolver = 4 };

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunArgs {
    std::string config;
    std::string variation;
    std::string from, to;
    int threads = 1;
    bool keep_going = false;
    std::string out_dir;
    bool strict_paper = false;
    bool dump_lp = false;
    bool quiet = false;
};

int run(const RunArgs& args) {
    using namespace h2bid;
    RunConfig config;
    try {
        config = load_config(args.config);
        if (!args.variation.empty()) {
            config.variations.clear();
            if (args.variation == "all") config.variations.assign(std::begin(kAllVariations), std::end(kAllVariations));
            else config.variations.push_back(parse_variation(args.variation));
        }
        if (!args.from.empty()) config.date_from = args.from;
        if (!args.to.empty()) config.date_to = args.to;
        if (!config.date_from.empty() && !is_iso_date(config.date_from)) throw ConfigError("--from is not an ISO date");
        if (!config.date_to.empty() && !is_iso_date(config.date_to)) throw ConfigError("--to is not an ISO date");
        if (!config.date_from.empty() && !config.date_to.empty() && config.date_from > config.date_to)
            throw ConfigError("date range is empty");
        if (!args.out_dir.empty()) config.output_dir = args.out_dir;
        if (args.strict_paper) config.strict_paper = true;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    }

    PriceArchive archive;
    try {
        archive = load_archive(config.prices, config.fcr_blocks, ArchiveOptions{config.zone});
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    }
    for (const auto& w : archive.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& r : archive.rejected) std::cerr << "rejected " << r.date << ": " << r.reason << '\n';

    SweepOptions sweep;
    sweep.threads = args.threads;
    sweep.keep_going = args.keep_going;
    if (args.dump_lp) sweep.dump_lp_dir = config.output_dir / "lp";
    if (!args.quiet) sweep.log = &std::cerr;

    RunReport report;
    try {
        report = run_sweep(config, archive, sweep);
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const SweepFailure& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolver;
    }
    write_report(report, config.output_dir, utc_now());

    bool any_failed = false;
    for (const auto& [v, t] : report.totals) {
        std::cout << to_string(v) << ": profit " << format_double(t.profit) << " EUR over " << t.days_ok << " days";
        if (!t.failed_days.empty()) {
            std::cout << ", " << t.failed_days.size() << " failed";
            any_failed = true;
        }
        std::cout << '\n';
    }
    std::cout << "report written to " << config.output_dir.string() << '\n';
    return any_failed ? kSolver : kOk;
}

int fit_curve(double capacity) {
    using namespace h2bid;
    const ElectrolyzerSpec spec = default_electrolyzer(capacity);
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["capacity_mw"] = spec.capacity;
    j["min_load_mw"] = spec.min_load;
    j["mean_efficiency_kg_per_mwh"] = spec.mean_efficiency;
    nlohmann::ordered_json segs = nlohmann::ordered_json::array();
    for (const auto& s : spec.curve.segments)
        segs.push_back({{"p_min", s.p_min}, {"p_max", s.p_max}, {"slope", s.slope}, {"intercept", s.intercept}});
    j["curve"] = segs;
    std::cout << j.dump(2) << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Electrolyzer day-ahead and reserve bidding: ex-post evaluation"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Solve and settle every configured day and variation");
    run_cmd->add_option("--config", run_args.config, "Run configuration (JSON)")->required();
    run_cmd->add_option("--variation", run_args.variation, "noas, oracle, a0, a1 or all")
        ->check(CLI::IsMember({"noas", "oracle", "a0", "a1", "all"}, CLI::ignore_case));
    run_cmd->add_option("--from", run_args.from, "First date (YYYY-MM-DD)");
    run_cmd->add_option("--to", run_args.to, "Last date (YYYY-MM-DD)");
    run_cmd->add_option("--threads", run_args.threads, "Worker threads")->check(CLI::Range(1, 256));
    run_cmd->add_flag("--keep-going", run_args.keep_going, "Continue past failed days");
    run_cmd->add_option("--out-dir", run_args.out_dir, "Output directory");
    run_cmd->add_flag("--strict-paper", run_args.strict_paper,
                      "Up-reserve headroom against \"not off\" and no scheduled daily minimum row");
    run_cmd->add_flag("--dump-lp", run_args.dump_lp, "Write every day model as CPLEX-LP under <out-dir>/lp");
    run_cmd->add_flag("--quiet", run_args.quiet, "No per-day progress on stderr");

    std::vector<std::string> reports;
    auto* compare_cmd = app.add_subcommand("compare", "Ratio and difference tables between reports");
    compare_cmd->add_option("reports", reports, "report.json files, first is the baseline")
        ->required()
        ->expected(2, -1);

    double capacity = 10.0;
    auto* fit_cmd = app.add_subcommand("fit-curve", "Print the default production curve as JSON");
    fit_cmd->add_option("--capacity", capacity, "Capacity in MW")->check(CLI::PositiveNumber);

    h2bid::SyntheticOptions synth;
    std::string synth_out = ".";
    bool synth_high = false;
    auto* synth_cmd = app.add_subcommand("synth", "Write a seeded synthetic price archive (prices.csv, fcr.csv)");
    synth_cmd->add_option("--seed", synth.seed, "RNG seed");
    synth_cmd->add_option("--days", synth.days, "Number of days")->check(CLI::Range(1, 3660));
    synth_cmd->add_option("--start", synth.start_date, "First date (YYYY-MM-DD)");
    synth_cmd->add_flag("--high-fcr", synth_high, "High FCR prices relative to day-ahead prices");
    synth_cmd->add_option("--out-dir", synth_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*run_cmd) return run(run_args);
        if (*fit_cmd) return fit_curve(capacity);
        if (*synth_cmd) {
            if (synth_high) synth.regime = h2bid::MarketRegime::HighFcr;
            const auto archive = h2bid::generate_archive(synth);
            std::filesystem::create_directories(synth_out);
            std::ofstream(std::filesystem::path(synth_out) / "prices.csv") << archive.hourly_csv;
            std::ofstream(std::filesystem::path(synth_out) / "fcr.csv") << archive.fcr_csv;
            return kOk;
        }
        if (*compare_cmd) {
            std::vector<std::filesystem::path> paths(reports.begin(), reports.end());
            h2bid::print_comparison(std::cout, h2bid::compare_reports(paths));
            return kOk;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSolver;
    }
    return kOk;
}
