// Solver benchmark over the days of a run configuration.
//   h2bid_bench CONFIG [most|first|pseudo] [one|nearest] [time_limit_s]

#include "h2bid/pipeline.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>

using namespace h2bid;

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: h2bid_bench CONFIG [most|first|pseudo] [one|nearest] [time_limit_s]\n";
        return 2;
    }
    RunConfig cfg = load_config(argv[1]);
    const std::string rule = argc > 2 ? argv[2] : "pseudo";
    const std::string order = argc > 3 ? argv[3] : "one";
    SolverConfig solver = cfg.solver;
    solver.branching = rule == "pseudo" ? BranchRule::PseudoCost
                       : rule == "first" ? BranchRule::FirstFractional
                                         : BranchRule::MostFractional;
    solver.child_order = order == "nearest" ? ChildOrder::Nearest : ChildOrder::OneFirst;
    if (argc > 4) solver.time_limit = std::atof(argv[4]);

    const PriceArchive archive = load_archive(cfg.prices, cfg.fcr_blocks);
    double seconds = 0.0;
    long nodes = 0;
    int unsolved = 0;
    for (const auto& date : select_dates(archive, cfg)) {
        const MaterializedDay day = materialize_day(archive, cfg, date);
        for (Variation v : cfg.variations) {
            const PreparedDay p = prepare_variation(v, day.instance, day.realized, cfg.model_options());
            const LpSolution root = solve_lp(p.model.milp);
            const MilpSolution s = solve_milp(p.model.milp, solver);
            std::cout << date << ' ' << to_string(v) << ' ' << to_string(s.status) << " obj=" << format_double(s.objective)
                      << " rootgap=" << (root.objective - s.objective) / std::max(1.0, std::abs(s.objective))
                      << " gap=" << s.relative_gap() << " nodes=" << s.nodes << " sec=" << s.seconds << std::endl;
            seconds += s.seconds;
            nodes += s.nodes;
            if (s.status != MilpStatus::Optimal) ++unsolved;
        }
    }
    std::cout << "total sec=" << seconds << " nodes=" << nodes << " unsolved=" << unsolved << '\n';
}
