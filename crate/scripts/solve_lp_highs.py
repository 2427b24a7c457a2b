#!/usr/bin/env python3
"""Solve an exported LP file with HiGHS and write the `name value` assignment
that `evtrip check-solution` reads. Needs `pip install highspy`."""

import argparse
import sys

import highspy


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("lp")
    ap.add_argument("-o", "--out", required=True)
    ap.add_argument("--time-limit", type=float, default=600.0)
    args = ap.parse_args()

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", args.time_limit)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 1e-9)
    # Default tolerances (1e-7) leak into the objective through the energy rows.
    h.setOptionValue("primal_feasibility_tolerance", 1e-9)
    h.setOptionValue("mip_feasibility_tolerance", 1e-9)
    h.readModel(args.lp)
    h.run()
    status = h.modelStatusToString(h.getModelStatus())
    if status != "Optimal":
        print(f"{args.lp}: {status}", file=sys.stderr)
        return 1

    lp = h.getLp()
    values = h.getSolution().col_value
    objective = h.getInfo().objective_function_value
    with open(args.out, "w") as f:
        f.write(f"# HiGHS {highspy.Highs().version()} optimum {objective!r}\n")
        for name, x in zip(lp.col_names_, values):
            if abs(x) > 1e-12:
                f.write(f"{name} {x!r}\n")
    print(f"{args.lp}: objective {objective}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
