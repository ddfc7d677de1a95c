#include "oracles.hpp"

#include "h2bid/model.hpp"
#include "h2bid/simplex.hpp"
#include "h2bid/synthetic.hpp"

#include <algorithm>
#include <stdexcept>

namespace oracle {

using h2bid::Relation;

h2bid::MilpModel SmallLp::to_model() const {
    h2bid::MilpModel model(n);
    for (int j = 0; j < n; ++j) model.set_column(j, lo[j], hi[j], c[j]);
    for (int i = 0; i < m(); ++i) {
        std::vector<h2bid::Term> terms;
        for (int j = 0; j < n; ++j)
            if (a[i][j] != 0) terms.push_back({j, static_cast<double>(a[i][j])});
        model.add_row(std::move(terms), relation[i], b[i]);
    }
    return model;
}

SmallLp random_lp(std::mt19937_64& rng, int n, int m) {
    std::uniform_int_distribution<int> coef(-5, 5), upper(1, 10), slack(0, 5), rel(0, 2);
    SmallLp lp;
    lp.n = n;
    std::vector<int> point(n);
    for (int j = 0; j < n; ++j) {
        lp.lo.push_back(0);
        lp.hi.push_back(upper(rng));
        lp.c.push_back(coef(rng));
        point[j] = std::uniform_int_distribution<int>(0, lp.hi[j])(rng);
    }
    for (int i = 0; i < m; ++i) {
        std::vector<int> row(n);
        int activity = 0;
        for (int j = 0; j < n; ++j) {
            row[j] = coef(rng);
            activity += row[j] * point[j];
        }
        const int kind = rel(rng);
        lp.a.push_back(row);
        if (kind == 0) {
            lp.relation.push_back(Relation::LessEqual);
            lp.b.push_back(activity + slack(rng));
        } else if (kind == 1) {
            lp.relation.push_back(Relation::GreaterEqual);
            lp.b.push_back(activity - slack(rng));
        } else {
            lp.relation.push_back(Relation::Equal);
            lp.b.push_back(activity);
        }
    }
    return lp;
}

namespace {

// One linear constraint g.x (rel) rhs over the LP's variables.
struct Constraint {
    std::vector<Rational> g;
    Relation relation;
    Rational rhs;
    int bound_of = -1;  // variable index for bound constraints
};

bool solve_exact(std::vector<std::vector<Rational>> a, std::vector<Rational> b, std::vector<Rational>& x) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int r = col; r < n; ++r)
            if (a[r][col] != 0) {
                pivot = r;
                break;
            }
        if (pivot < 0) return false;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (int r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0) continue;
            const Rational f = a[r][col] / a[col][col];
            for (int k = col; k < n; ++k) a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    x.resize(n);
    for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return true;
}

bool satisfied(const Constraint& c, const std::vector<Rational>& x) {
    Rational lhs = 0;
    for (std::size_t j = 0; j < x.size(); ++j) lhs += c.g[j] * x[j];
    switch (c.relation) {
        case Relation::LessEqual: return lhs <= c.rhs;
        case Relation::GreaterEqual: return lhs >= c.rhs;
        case Relation::Equal: return lhs == c.rhs;
    }
    return false;
}

}  // namespace

RationalOptimum vertex_enumeration(const SmallLp& lp) {
    const int n = lp.n;
    std::vector<Constraint> all;
    for (int i = 0; i < lp.m(); ++i) {
        Constraint c{std::vector<Rational>(n), lp.relation[i], Rational(lp.b[i])};
        for (int j = 0; j < n; ++j) c.g[j] = lp.a[i][j];
        all.push_back(std::move(c));
    }
    for (int j = 0; j < n; ++j) {
        Constraint low{std::vector<Rational>(n), Relation::GreaterEqual, Rational(lp.lo[j]), j};
        low.g[j] = 1;
        Constraint up{std::vector<Rational>(n), Relation::LessEqual, Rational(lp.hi[j]), j};
        up.g[j] = 1;
        all.push_back(std::move(low));
        all.push_back(std::move(up));
    }

    RationalOptimum best;
    std::vector<int> chosen;
    std::vector<bool> bound_used(n, false);
    const int total = static_cast<int>(all.size());

    auto evaluate = [&]() {
        std::vector<std::vector<Rational>> a;
        std::vector<Rational> b;
        for (int k : chosen) {
            a.push_back(all[k].g);
            b.push_back(all[k].rhs);
        }
        ++best.systems;
        std::vector<Rational> x;
        if (!solve_exact(std::move(a), std::move(b), x)) return;
        for (const Constraint& c : all)
            if (!satisfied(c, x)) return;
        Rational value = 0;
        for (int j = 0; j < n; ++j) value += lp.c[j] * x[j];
        if (!best.feasible || value > best.objective) {
            best.feasible = true;
            best.objective = value;
            best.x = x;
        }
    };

    auto recurse = [&](auto&& self, int start) -> void {
        if (static_cast<int>(chosen.size()) == n) {
            evaluate();
            return;
        }
        for (int k = start; k < total; ++k) {
            if (total - k < n - static_cast<int>(chosen.size())) return;
            const int var = all[k].bound_of;
            if (var >= 0 && bound_used[var]) continue;  // lower and upper at once
            if (var >= 0) bound_used[var] = true;
            chosen.push_back(k);
            self(self, k + 1);
            chosen.pop_back();
            if (var >= 0) bound_used[var] = false;
        }
    };
    recurse(recurse, 0);
    return best;
}

EnumerationResult enumerate_binaries(const h2bid::MilpModel& model, int max_free) {
    std::vector<int> free;
    for (int j = 0; j < model.num_vars(); ++j)
        if (model.binary[j] && model.lower[j] < model.upper[j]) free.push_back(j);
    if (static_cast<int>(free.size()) > max_free) throw std::invalid_argument("too many free binaries to enumerate");

    EnumerationResult out;
    const long count = 1L << free.size();
    out.assignments = count;

    Eigen::VectorXd lo = model.lower, hi = model.upper;
    h2bid::SimplexEngine engine(model);
    engine.solve();

    constexpr double tol = 1e-9;
    for (long i = 0; i < count; ++i) {
        for (std::size_t k = 0; k < free.size(); ++k) {
            const double v = ((i >> k) & 1) ? 1.0 : 0.0;
            lo[free[k]] = hi[free[k]] = v;
        }
        // rows that cannot be met with these binaries whatever the continuous values
        bool possible = true;
        for (const auto& row : model.rows) {
            double min_act = 0.0, max_act = 0.0;
            for (const auto& t : row.terms) {
                const double a = t.coef * lo[t.col], b = t.coef * hi[t.col];
                min_act += std::min(a, b);
                max_act += std::max(a, b);
            }
            if ((row.relation != Relation::GreaterEqual && min_act > row.rhs + tol) ||
                (row.relation != Relation::LessEqual && max_act < row.rhs - tol)) {
                possible = false;
                break;
            }
        }
        if (!possible) continue;

        for (int col : free) engine.set_bounds(col, lo[col], hi[col]);
        ++out.lp_solves;
        h2bid::LpSolution lp = engine.resolve();
        if (lp.status == h2bid::LpStatus::Optimal && model.max_row_violation(lp.x) > 1e-7) {
            // warm path drifted; settle it with a cold solve
            h2bid::MilpModel fixed = model;
            for (int col : free) fixed.lower[col] = fixed.upper[col] = lo[col];
            lp = h2bid::solve_lp(fixed);
        }
        if (lp.status != h2bid::LpStatus::Optimal) continue;
        ++out.feasible_assignments;
        if (!out.feasible || lp.objective > out.objective) {
            out.feasible = true;
            out.objective = lp.objective;
            out.x = lp.x;
        }
    }
    return out;
}

std::filesystem::path data_dir() { return H2BID_TEST_DATA_DIR; }

h2bid::ElectrolyzerSpec fixture_spec() { return h2bid::load_curve_fixture(data_dir() / "default_curve_v1.json"); }

h2bid::ProductionCurve coarse_curve(const h2bid::ProductionCurve& fine, int segments) {
    if (segments == fine.size()) return fine;
    std::vector<double> points{fine.min_power()};
    if (segments == 2) points.push_back(fine.segments[1].p_max);
    else if (segments != 1) throw std::invalid_argument("coarse_curve: 1, 2 or the fine count");
    points.push_back(fine.max_power());
    h2bid::ProductionCurve out;
    for (std::size_t k = 0; k + 1 < points.size(); ++k) {
        const double p0 = points[k], p1 = points[k + 1];
        const double r0 = h2bid::evaluate_curve(fine, p0), r1 = h2bid::evaluate_curve(fine, p1);
        const double slope = (r1 - r0) / (p1 - p0);
        out.segments.push_back({p0, p1, slope, r0 - slope * p0});
    }
    return out;
}

h2bid::DayInstance flat_day(double da, double fcr, double mfrr_up, double mfrr_dn) {
    h2bid::DayInstance inst;
    inst.label = "flat";
    inst.spec = fixture_spec();
    inst.contract = h2bid::default_contract();
    const int T = inst.hours();
    inst.da_prices = Eigen::VectorXd::Constant(T, da);
    inst.fcr_prices = Eigen::VectorXd::Constant(inst.market.num_blocks(), fcr);
    inst.mfrr_up_prices = Eigen::VectorXd::Constant(T, mfrr_up);
    inst.mfrr_dn_prices = Eigen::VectorXd::Constant(T, mfrr_dn);
    inst.alpha_up = Eigen::VectorXd::Zero(T);
    inst.alpha_dn = Eigen::VectorXd::Zero(T);
    return inst;
}

h2bid::DayInstance random_small_day(std::mt19937_64& rng, int T, int S) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto uniform = [&](double a, double b) { return a + (b - a) * u(rng); };
    auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };

    const h2bid::ElectrolyzerSpec fixture = fixture_spec();
    h2bid::DayInstance inst;
    inst.label = "small";
    inst.spec = fixture;
    inst.spec.curve = coarse_curve(fixture.curve, S);
    inst.market.hours_per_day = T;
    inst.market.fcr_block_hours = (T % 2 == 0 && u(rng) < 0.5) ? 2 : T;
    const int B = inst.market.num_blocks();

    inst.contract.price = uniform(5.0, 12.0);
    inst.contract.dispenser_capacity = uniform(120.0, 250.0);
    h2bid::TrailerSlot trailer;
    trailer.capacity = uniform(150.0, 300.0) * T;
    trailer.available = h2bid::Mask::Constant(T, true);
    if (u(rng) < 0.3) {
        const int from = pick(0, T - 1);
        const int to = pick(from + 1, T);
        trailer.available = h2bid::Mask::Constant(T, false);
        for (int t = from; t < to; ++t) trailer.available[t] = true;
    }
    inst.contract.trailers = {trailer};
    inst.contract.min_daily_demand = u(rng) < 0.3 ? 0.0 : uniform(0.05, 0.5) * fixture.curve.max_rate() * T;

    inst.da_prices.resize(T);
    inst.mfrr_up_prices.resize(T);
    inst.mfrr_dn_prices.resize(T);
    inst.alpha_up.resize(T);
    inst.alpha_dn.resize(T);
    auto alpha = [&]() {
        const double r = u(rng);
        return r < 0.35 ? 0.0 : r < 0.7 ? 1.0 : uniform(0.0, 1.0);
    };
    for (int t = 0; t < T; ++t) {
        inst.da_prices[t] = uniform(-20.0, 160.0);
        inst.mfrr_up_prices[t] = uniform(0.0, 40.0);
        inst.mfrr_dn_prices[t] = uniform(0.0, 15.0);
        inst.alpha_up[t] = alpha();
        inst.alpha_dn[t] = alpha();
    }
    inst.fcr_prices.resize(B);
    for (int i = 0; i < B; ++i) inst.fcr_prices[i] = uniform(0.0, 40.0);
    if (u(rng) < 0.25) {
        inst.initial_off_state = true;
        inst.initial_off_residual = pick(0, 1);
    }
    return inst;
}

MicroCase micro_case(std::mt19937_64& rng) {
    using h2bid::VarKind;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto uniform = [&](double a, double b) { return a + (b - a) * u(rng); };
    auto pick = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };

    for (;;) {
        h2bid::DayInstance inst = random_small_day(rng, pick(2, 4), pick(1, 2));
        const int T = inst.hours();
        const auto& trailer = inst.contract.trailers[0];

        // constructed feasible point: no reserves, every copy at the scheduled power
        std::vector<int> state(T);  // 0 online, 1 standby, 2 off
        std::vector<double> power(T, 0.0);
        double producible = 0.0;
        for (int t = 0; t < T; ++t) {
            const bool forced_off = inst.initial_off_state && t < inst.initial_off_residual;
            const bool can_dispense = trailer.available[t];
            state[t] = forced_off ? 2 : !can_dispense ? pick(1, 2) : u(rng) < 0.75 ? 0 : pick(1, 2);
            if (state[t] == 0) {
                power[t] = uniform(inst.spec.curve.min_power(), inst.spec.curve.max_power());
                producible += h2bid::evaluate_curve(inst.spec.curve, power[t]);
            }
        }
        inst.contract.min_daily_demand = u(rng) < 0.3 ? 0.0 : uniform(0.2, 0.9) * producible;
        if (!h2bid::validate_instance(inst).empty()) continue;

        h2bid::DayModel dm = h2bid::build_model(inst);
        if (u(rng) < 0.2) h2bid::disable_reserves(dm);
        const auto& ix = dm.index;
        h2bid::MilpModel& m = dm.milp;

        Eigen::VectorXd anchor = Eigen::VectorXd::Zero(m.num_vars());
        for (int t = 0; t < T; ++t) {
            if (state[t] == 0) {
                const int s = h2bid::segment_of(inst.spec.curve, power[t]);
                anchor[ix.seg(VarKind::SegmentOn, t, s)] = 1.0;
                anchor[ix.seg(VarKind::ActUpSegmentOn, t, s)] = 1.0;
                anchor[ix.seg(VarKind::ActDownSegmentOn, t, s)] = 1.0;
                anchor[ix.at(VarKind::Online, t)] = 1.0;
            } else {
                anchor[ix.at(state[t] == 1 ? VarKind::Standby : VarKind::Off, t)] = 1.0;
            }
        }

        h2bid::MilpModel fixed = m;
        for (int j = 0; j < m.num_vars(); ++j)
            if (m.binary[j]) fixed.lower[j] = fixed.upper[j] = anchor[j];
        if (!fixed.structural_issues().empty()) continue;
        if (h2bid::solve_lp(fixed).status != h2bid::LpStatus::Optimal) continue;

        std::vector<int> open;
        for (int j = 0; j < m.num_vars(); ++j)
            if (m.binary[j] && m.lower[j] < m.upper[j]) open.push_back(j);
        std::shuffle(open.begin(), open.end(), rng);
        const int keep = std::min<int>(14, static_cast<int>(open.size()));
        for (std::size_t k = keep; k < open.size(); ++k) m.lower[open[k]] = m.upper[open[k]] = anchor[open[k]];

        MicroCase out;
        out.instance = std::move(inst);
        out.model = std::move(m);
        out.free_binaries = keep;
        return out;
    }
}

SyntheticRun synthetic_run(std::uint64_t seed, int days, bool high_fcr) {
    h2bid::SyntheticOptions opt;
    opt.seed = seed;
    opt.days = days;
    opt.regime = high_fcr ? h2bid::MarketRegime::HighFcr : h2bid::MarketRegime::Moderate;
    const auto text = h2bid::generate_archive(opt);
    SyntheticRun run;
    run.archive = h2bid::parse_archive(text.hourly_csv, text.fcr_csv);
    const auto spec = fixture_spec();
    run.config.spec.capacity = spec.capacity;
    run.config.spec.min_load = spec.min_load;
    run.config.spec.curve = spec.curve;
    run.config.spec.mean_efficiency = spec.mean_efficiency;
    return run;
}

Replay replay(const h2bid::BidSchedule& bids, const h2bid::DayInstance& inst, const std::vector<bool>& activated_up,
              const std::vector<bool>& activated_dn) {
    const auto& curve = inst.spec.curve;
    constexpr double tol = 1e-9;
    Replay out;
    for (int t = 0; t < inst.hours(); ++t) {
        double h = 0.0;
        if (!activated_up[t] && !activated_dn[t]) {
            h = bids.h_sched[t];
        } else {
            double p = bids.p_tot[t];
            if (activated_up[t]) p -= bids.p_mfrr_up[t];
            if (activated_dn[t]) p += bids.p_mfrr_dn[t];
            if (p > tol && p >= curve.min_power() - tol) {
                p = std::min(std::max(p, curve.min_power()), curve.max_power());
                std::size_t s = 0;
                while (s + 1 < curve.segments.size() && p > curve.segments[s].p_max + tol) ++s;
                h = (curve.segments[s].slope * p + curve.segments[s].intercept) * inst.market.time_step;
            }
        }
        out.hydrogen.push_back(h);
        out.total_kg += h;
    }
    out.unmet_kg = std::max(0.0, inst.contract.min_daily_demand - out.total_kg);
    return out;
}

}  // namespace oracle
