"""Tour tables for the two small instances and the fractional x point on graph 1..8."""

import argparse

from flowcheck import Dimension, ModelConfig
from flowcheck.checker import check, gap_report
from flowcheck.model_x import build_x_model
from flowcheck.oracle import brute_force, cost_histogram, tours
from flowcheck.valleys import gen_table_instance, graph8_fractional_point

LETTERS = "ABCD"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=5, help="histogram rows to print")
    args = parser.parse_args()

    abcd = gen_table_instance("abcd")
    print("ABCD tours from A")
    for tour, cost in tours(abcd):
        print("  " + "->".join(LETTERS[v - 1] for v in tour + (1,)) + f"\t{cost}")

    graph8 = gen_table_instance("graph8")
    print("\ngraph 1..8, cheapest costs (all_rotations | fixed_start)")
    rotated = cost_histogram(graph8, "all_rotations")
    fixed = cost_histogram(graph8)
    for cost in list(rotated)[:args.rows]:
        example = next(t for t, c in tours(graph8) if c == cost)
        print(f"  {cost}\t{rotated[cost]:>3} | {fixed[cost]:>2}\t" + "->".join(map(str, example + (1,))))

    point = graph8_fractional_point()
    report = check(build_x_model(graph8, ModelConfig(Dimension.X)), point, instance=graph8)
    oracle = brute_force(graph8).optimal_cost
    print(f"\nfractional x point: {report.summary()}")
    print(f"tour optimum {oracle}, gap {gap_report(graph8, point, oracle)}")


if __name__ == "__main__":
    main()
