#include "oracles.hpp"

#include "h2bid/domain.hpp"

#include <doctest.h>

#include <cmath>
#include <json.hpp>

using namespace h2bid;

namespace {

bool mentions(const std::vector<std::string>& issues, const std::string& text) {
    for (const auto& s : issues)
        if (s.find(text) != std::string::npos) return true;
    return false;
}

ProductionCurve two_piece() { return {{{1.0, 3.0, 21.0, -1.0}, {3.0, 10.0, 18.0, 8.0}}}; }

}  // namespace

TEST_SUITE("domain") {

TEST_CASE("zero power produces nothing") {
    CHECK(evaluate_curve(oracle::fixture_spec().curve, 0.0) == 0.0);
}

TEST_CASE("single segment evaluates linearly") {
    const ProductionCurve curve{{{1.0, 10.0, 20.0, 0.0}}};
    CHECK(evaluate_curve(curve, 5.0) == doctest::Approx(100.0).epsilon(1e-15));
}

TEST_CASE("breakpoint value agrees from both sides") {
    // both segment formulas evaluated at the breakpoint by hand
    const double lower = 21.0 * 3.0 - 1.0;
    const double upper = 18.0 * 3.0 + 8.0;
    REQUIRE(lower == upper);
    CHECK(evaluate_curve(two_piece(), 3.0) == lower);
    CHECK(segment_of(two_piece(), 3.0) == 0);
    CHECK(segment_of(two_piece(), 3.0 + 1e-6) == 1);
}

TEST_CASE("forbidden band and overload are domain errors") {
    const auto curve = two_piece();
    CHECK_THROWS_WITH_AS(evaluate_curve(curve, 0.5), doctest::Contains("below minimum load"), DomainError);
    CHECK_THROWS_WITH_AS(evaluate_curve(curve, 10.5), doctest::Contains("above capacity"), DomainError);
    CHECK_THROWS_AS(evaluate_curve(curve, -1.0), DomainError);
}

TEST_CASE("fixture curve is continuous and monotone") {
    const auto curve = oracle::fixture_spec().curve;
    REQUIRE(curve_issues(curve).empty());
    for (int k = 0; k + 1 < curve.size(); ++k) {
        const double b = curve.segments[k].p_max;
        CHECK(std::abs(curve.segments[k].rate(b) - curve.segments[k + 1].rate(b)) <= 1e-9);
    }
    double previous = evaluate_curve(curve, curve.min_power());
    for (double p = curve.min_power(); p <= curve.max_power(); p += 0.01) {
        const double r = evaluate_curve(curve, p);
        CHECK(r >= previous);
        previous = r;
    }
}

TEST_CASE("curve invariants are reported") {
    ProductionCurve gap{{{1.0, 3.0, 20.0, 0.0}, {4.0, 10.0, 20.0, 0.0}}};
    CHECK(mentions(curve_issues(gap), "not contiguous"));
    ProductionCurve jump{{{1.0, 3.0, 20.0, 0.0}, {3.0, 10.0, 20.0, 1.0}}};
    CHECK(mentions(curve_issues(jump), "discontinuous"));
    ProductionCurve flat{{{1.0, 10.0, 0.0, 5.0}}};
    CHECK(mentions(curve_issues(flat), "slope must be positive"));
    ProductionCurve negative{{{1.0, 10.0, 1.0, -5.0}}};
    CHECK(mentions(curve_issues(negative), "negative hydrogen output"));
    ProductionCurve reversed{{{3.0, 1.0, 20.0, 0.0}}};
    CHECK(mentions(curve_issues(reversed), "p_min must be below p_max"));
    CHECK(mentions(curve_issues(ProductionCurve{}), "no segments"));
}

TEST_CASE("electrolyzer invariants") {
    ElectrolyzerSpec spec = oracle::fixture_spec();
    REQUIRE(spec_issues(spec).empty());
    auto bad = spec;
    bad.min_load = bad.capacity;
    CHECK(mentions(spec_issues(bad), "minimum load must lie strictly between"));
    bad = spec;
    bad.standby_power = bad.min_load;
    CHECK(mentions(spec_issues(bad), "standby power"));
    bad = spec;
    bad.min_down_time = 0;
    CHECK(mentions(spec_issues(bad), "minimum down-time"));
    bad = spec;
    bad.mean_efficiency = 0.0;
    CHECK(mentions(spec_issues(bad), "mean efficiency"));
}

TEST_CASE("contract and market invariants") {
    const auto spec = oracle::fixture_spec();
    HydrogenContract c = default_contract();
    REQUIRE(contract_issues(c, spec, 24).empty());
    c.price = -1.0;
    c.dispenser_capacity = 0.0;
    c.min_daily_demand = 24.0 * spec.curve.max_rate() + 1.0;
    const auto issues = contract_issues(c, spec, 24);
    CHECK(mentions(issues, "hydrogen price must be non-negative"));
    CHECK(mentions(issues, "dispenser capacity must be positive"));
    CHECK(mentions(issues, "minimum demand exceeds daily production capability"));

    HydrogenContract split = default_contract();
    split.trailers[0].available[3] = false;  // leaves twice
    split.trailers[0].available[0] = false;
    CHECK(mentions(contract_issues(split, spec, 24), "not one window"));
    HydrogenContract window = default_contract();
    for (int t = 0; t < 6; ++t) window.trailers[1].available[t] = false;
    CHECK(contract_issues(window, spec, 24).empty());

    MarketStructure m;
    REQUIRE(market_issues(m).empty());
    m.fcr_block_hours = 5;
    CHECK(mentions(market_issues(m), "divisible by the FCR block length"));
    m = MarketStructure{};
    m.mfrr_bid_min = 2.0;
    m.mfrr_bid_max = 1.0;
    CHECK(mentions(market_issues(m), "mFRR bid limits"));
}

TEST_CASE("validate_instance accepts a well-formed day and is idempotent") {
    const DayInstance inst = oracle::flat_day();
    const auto first = validate_instance(inst);
    CHECK(first.empty());
    CHECK(validate_instance(require_valid(inst)) == first);
}

TEST_CASE("validate_instance reports every issue") {
    DayInstance inst = oracle::flat_day();
    inst.da_prices.resize(23);
    inst.alpha_up[4] = 1.5;
    const auto issues = validate_instance(inst);
    CHECK(mentions(issues, "price series length"));
    CHECK(mentions(issues, "alpha out of range"));
    CHECK(issues.size() >= 2);
    CHECK(validate_instance(inst) == issues);
    CHECK_THROWS_AS(require_valid(inst), InvalidInstance);
}

TEST_CASE("non-finite prices are rejected, negative day-ahead prices are not") {
    DayInstance inst = oracle::flat_day();
    inst.da_prices[0] = -30.0;
    CHECK(validate_instance(inst).empty());
    inst.fcr_prices[2] = std::nan("");
    CHECK_FALSE(validate_instance(inst).empty());
}

TEST_CASE("schedule invariants") {
    const DayInstance inst = oracle::flat_day();
    BidSchedule bids;
    const int T = inst.hours();
    bids.p_da = Eigen::VectorXd::Constant(T, 5.0);
    bids.p_tot = Eigen::VectorXd::Constant(T, 5.0);
    bids.h_sched = Eigen::VectorXd::Constant(T, evaluate_curve(inst.spec.curve, 5.0));
    bids.p_fcr = Eigen::VectorXd::Zero(inst.market.num_blocks());
    bids.p_mfrr_up = Eigen::VectorXd::Zero(T);
    bids.p_mfrr_dn = Eigen::VectorXd::Zero(T);
    bids.states.assign(T, OperatingState::Online);
    REQUIRE(schedule_issues(bids, inst).empty());

    auto wrong = bids;
    wrong.p_da[2] = 4.0;
    CHECK(mentions(schedule_issues(wrong, inst), "day-ahead quantity differs"));
    wrong = bids;
    wrong.p_mfrr_up[1] = 0.05;
    CHECK(mentions(schedule_issues(wrong, inst), "mFRR bid outside size limits"));
    wrong = bids;
    wrong.p_fcr[0] = 0.01;
    CHECK(mentions(schedule_issues(wrong, inst), "FCR bid outside size limits"));
    wrong = bids;
    wrong.states[7] = OperatingState::Off;
    CHECK(mentions(schedule_issues(wrong, inst), "consumption while not online"));
}

TEST_CASE("default curve fixture is the documented fit") {
    const ElectrolyzerSpec fixture = oracle::fixture_spec();
    const ReferenceYieldModel reference;
    CurveFitOptions options;
    options.capacity = fixture.capacity;
    const ProductionCurve refit = fit_production_curve(reference, options);
    REQUIRE(refit.size() == fixture.curve.size());
    for (int k = 0; k < refit.size(); ++k) {
        CHECK(refit.segments[k].p_min == doctest::Approx(fixture.curve.segments[k].p_min).epsilon(1e-12));
        CHECK(refit.segments[k].p_max == doctest::Approx(fixture.curve.segments[k].p_max).epsilon(1e-12));
        CHECK(refit.segments[k].slope == doctest::Approx(fixture.curve.segments[k].slope).epsilon(1e-9));
        CHECK(refit.segments[k].intercept == doctest::Approx(fixture.curve.segments[k].intercept).epsilon(1e-9));
    }
    CHECK(mean_specific_yield(reference, fixture.capacity, fixture.min_load) ==
          doctest::Approx(fixture.mean_efficiency).epsilon(1e-12));
    CHECK(fixture.curve.min_power() == doctest::Approx(0.1 * fixture.capacity));
    CHECK(fixture.curve.max_power() == doctest::Approx(fixture.capacity));
}

TEST_CASE("reference yield peaks at 30 percent loading") {
    const ReferenceYieldModel reference;
    const double peak = reference.yield(0.3);
    CHECK(peak == doctest::Approx(reference.peak_yield).epsilon(1e-12));
    for (double x = 0.1; x <= 1.0; x += 0.01) CHECK(reference.yield(x) <= peak + 1e-12);
    CHECK(reference.yield(1.0) == doctest::Approx(reference.full_load_yield).epsilon(1e-12));
    // specific yield of the fitted curve is highest on the segment around the peak
    const auto curve = oracle::fixture_spec().curve;
    const double at_peak = evaluate_curve(curve, 3.0) / 3.0;
    CHECK(at_peak > evaluate_curve(curve, 1.0) / 1.0);
    CHECK(at_peak > evaluate_curve(curve, 10.0) / 10.0);
}

}  // TEST_SUITE
