"""End-to-end run on the 32-node valley instance.

Constructs the x, y and z points, builds the support-restricted z model,
writes the LP file and the assignment file, checks every equation and
compares the objective with the exact tour optimum.
"""

import argparse
import time
from pathlib import Path

from flowcheck import Dimension
from flowcheck.checker import check, gap_report
from flowcheck.lpio import emit_lp, write_assignment
from flowcheck.model_blp import build_blp
from flowcheck.oracle import branch_and_bound
from flowcheck.valleys import (ValleySpec, construct_x_flow, construct_y_flow, construct_z_flow,
                               counterexample_config, gen_valley_instance)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="out/valley32", help="directory for the LP and point files")
    parser.add_argument("--no-files", action="store_true", help="skip writing the (large) files")
    parser.add_argument("--visit-constraints", action="store_true")
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args()

    t0 = time.perf_counter()
    spec = ValleySpec(total_flow=32 * 81)
    inst = gen_valley_instance(spec)
    x = construct_x_flow(spec)
    config = counterexample_config(spec, x, Dimension.Z,
                                   include_visit_constraints=args.visit_constraints or None)
    y = construct_y_flow(x, config, spec.n)
    z = construct_z_flow(x, y, config, spec.n)
    model = build_blp(inst, config)
    print(f"constructed {len(z)} y/z values in {time.perf_counter() - t0:.1f}s")

    if not args.no_files:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "model.lp", "w") as fh:
            emit_lp(model, fh, threads=args.threads)
        with open(out / "point.txt", "w") as fh:
            write_assignment(z, fh)
        print(f"wrote {out / 'model.lp'} and {out / 'point.txt'}")

    t1 = time.perf_counter()
    report = check(model, z, instance=inst, threads=args.threads)
    print(f"{report.summary()}  ({time.perf_counter() - t1:.1f}s)")
    for line in report.lines()[:10]:
        print("  " + line)
    oracle = branch_and_bound(inst)
    gap = gap_report(inst, z, oracle.optimal_cost)
    print(f"tour optimum {oracle.optimal_cost} x {spec.total_flow} flow; gap {gap}")
    print("counterexample confirmed" if report.feasible and gap < 0 else "no counterexample")


if __name__ == "__main__":
    main()
