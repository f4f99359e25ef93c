"""Mountain crossings of the x constructions against the tour optimum."""

import argparse
import time

from flowcheck import Dimension, ModelConfig
from flowcheck.checker import check
from flowcheck.model_x import build_x_model
from flowcheck.oracle import branch_and_bound
from flowcheck.valleys import (ValleySpec, construct_x_flow, crossing_weight, gen_valley_instance,
                               valley_optimum)

LAYOUTS = {
    "four valleys, one path": dict(paths=1, valley_size=3),
    "four valleys, three paths": dict(),
    "seven valleys": dict(paths=2, pairs=2, valley_size=4),
    "ten valleys": dict(paths=3, pairs=3, valley_size=12),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--k", type=int, nargs="*", default=[],
                        help="also run the generalized k-family (k=3 takes ~15 s of branch and bound)")
    args = parser.parse_args()
    layouts = dict(LAYOUTS)
    for k in args.k:
        layouts[f"k={k} family"] = ValleySpec.generalized(k)
    print("layout\tnodes\tcrossing weight\ttour crossings\tx feasible\toracle\tseconds")
    for name, spec in layouts.items():
        spec = spec if isinstance(spec, ValleySpec) else ValleySpec(**spec)
        inst = gen_valley_instance(spec)
        x = construct_x_flow(spec)
        feasible = check(build_x_model(inst, ModelConfig(Dimension.X)), x).feasible
        started = time.perf_counter()
        oracle = branch_and_bound(inst).optimal_cost
        assert oracle == valley_optimum(spec)
        print(f"{name}\t{spec.n}\t{crossing_weight(spec, x)}\t{len(spec.valleys())}\t{feasible}"
              f"\t{oracle}\t{time.perf_counter() - started:.2f}")


if __name__ == "__main__":
    main()
