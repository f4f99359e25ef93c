"""Equation counts per family for a y/z model."""

import argparse

from flowcheck import Dimension, ModelConfig, StartMode, Version
from flowcheck.model_blp import build_blp, variables_of
from flowcheck.valleys import (ValleySpec, construct_x_flow, counterexample_config,
                               gen_table_instance, gen_valley_instance)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--instance", default="valleys", help="abcd, graph8 or valleys (32 nodes, restricted)")
    parser.add_argument("--model", choices=["y", "z"], default="z")
    parser.add_argument("--version", choices=["old", "new"], default="new")
    parser.add_argument("--start", choices=["fixed", "free"], default="free")
    parser.add_argument("--variables", action="store_true", help="also count distinct variables")
    args = parser.parse_args()

    dim = Dimension(args.model)
    if args.instance == "valleys":
        spec = ValleySpec(total_flow=32 * 81)
        inst = gen_valley_instance(spec)
        config = counterexample_config(spec, construct_x_flow(spec), dim, args.version)
    else:
        inst = gen_table_instance(args.instance)
        config = ModelConfig(dim, StartMode(args.start), Version(args.version))
    model = build_blp(inst, config)
    counts = model.family_counts()
    for family, count in counts.items():
        print(f"{family}\t{count}")
    print(f"total\t{sum(counts.values())}")
    if args.variables:
        print(f"variables\t{len(variables_of(model))}")


if __name__ == "__main__":
    main()
