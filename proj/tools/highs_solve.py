#!/usr/bin/env python3
"""External MILP backend for h2bid: solves a CPLEX-LP file with HiGHS.

usage: highs_solve.py MODEL.lp SOLUTION.txt [--gap G] [--time-limit S]
       highs_solve.py --check
"""
import argparse
import sys


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("model", nargs="?")
    parser.add_argument("solution", nargs="?")
    parser.add_argument("--gap", type=float, default=1e-6)
    parser.add_argument("--time-limit", type=float, default=None)
    parser.add_argument("--check", action="store_true")
    args = parser.parse_args()

    try:
        import highspy
    except ImportError:
        print("highspy is not installed", file=sys.stderr)
        return 3
    if args.check:
        return 0
    if not args.model or not args.solution:
        parser.error("model and solution paths are required")

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", args.gap)
    h.setOptionValue("threads", 1)
    if args.time_limit is not None:
        h.setOptionValue("time_limit", args.time_limit)
    if h.readModel(args.model) != highspy.HighsStatus.kOk:
        print("cannot read " + args.model, file=sys.stderr)
        return 2
    h.run()
    status = h.getModelStatus()
    S = highspy.HighsModelStatus
    info = h.getInfo()
    with open(args.solution, "w") as out:
        if status == S.kOptimal:
            tag = "optimal"
        elif status == S.kInfeasible:
            tag = "infeasible"
        elif status in (S.kUnbounded, S.kUnboundedOrInfeasible):
            tag = "unbounded"
        elif info.primal_solution_status == 2:
            tag = "limit"
        else:
            print("no solution: " + h.modelStatusToString(status), file=sys.stderr)
            return 4
        out.write("status %s\n" % tag)
        out.write("objective %.17g\n" % info.objective_function_value)
        if tag in ("optimal", "limit"):
            names = h.getLp().col_names_
            values = h.getSolution().col_value
            for n, v in zip(names, values):
                out.write("%s %.17g\n" % (n, v))
    return 0


if __name__ == "__main__":
    sys.exit(main())
