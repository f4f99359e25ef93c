"""Command-line entry point: ``flowcheck <command> ...``.

Exit codes: 0 success (for ``check``: feasible; for ``refute``: feasible and
strictly cheaper than the tour optimum), 1 a check or refutation that did
not go through, 2 bad input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .checker import Mode, check, gap_report
from .core import (Assignment, Dimension, Instance, ModelConfig, StartMode, Version,
                   format_rational, resolve_threads)
from .lpio import (emit_lp, parse_lp, read_assignment, read_instance, write_assignment,
                   write_instance)
from .model_blp import Support, build_blp, variables_of
from .model_x import build_x_model, tour_to_assignment
from .oracle import CONVENTIONS, branch_and_bound, brute_force, cost_histogram
from .valleys import (ConstructionError, ValleySpec, construct_x_flow, construct_y_flow,
                      construct_z_flow, counterexample_config, crossing_weight,
                      gen_table_instance, gen_valley_instance, graph8_fractional_point,
                      valley_optimum)

VALLEY32_FLOW = 32 * 81


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def _add_valley_flags(p):
    g = p.add_argument_group("valley layout")
    g.add_argument("--paths", type=int, default=3)
    g.add_argument("--pairs", type=int, default=1)
    g.add_argument("--valley-size", type=int, default=None,
                   help="nodes per pair valley (default 4 * paths)")
    g.add_argument("--lead-in", type=int, default=4)
    g.add_argument("--lead-out", type=int, default=4)
    g.add_argument("--separator", type=int, default=None)
    g.add_argument("--cross-cost", type=int, default=1000)
    g.add_argument("--in-cost", type=int, default=1)
    g.add_argument("--k", type=int, default=None, help="generalized k-dimension family")


def _valley_spec(args, total_flow=1) -> ValleySpec:
    if args.k is not None:
        return ValleySpec.generalized(args.k, cross_cost=args.cross_cost, in_cost=args.in_cost,
                                      total_flow=total_flow)
    size = args.valley_size if args.valley_size is not None else 4 * args.paths
    return ValleySpec(lead_in=args.lead_in, lead_out=args.lead_out, valley_size=size,
                      paths=args.paths, pairs=args.pairs, cross_cost=args.cross_cost,
                      in_cost=args.in_cost, separator_size=args.separator, total_flow=total_flow)


def _add_model_flags(p):
    g = p.add_argument_group("model")
    g.add_argument("--model", default="x", help="x, y or z (check also accepts an LP file)")
    g.add_argument("--version", choices=["old", "new"], default="new")
    g.add_argument("--start", choices=["fixed", "free"], default="free")
    g.add_argument("--visit-constraints", action="store_true", default=None)
    g.add_argument("--relate", action="store_true", default=None)
    g.add_argument("--first-step-reach", action="store_true")
    g.add_argument("--total-flow", type=int, default=None)
    g.add_argument("--restrict", default=None,
                   help="assignment file whose support limits the variables ('auto': the checked point)")


def _config(args, total_flow=1, support=None) -> ModelConfig:
    if args.model not in ("x", "y", "z"):
        raise UsageError(f"--model must be x, y or z, got {args.model!r}")
    return ModelConfig(
        dimension=Dimension(args.model), start_mode=StartMode(args.start),
        version=Version(args.version), include_visit_constraints=args.visit_constraints,
        include_relate=args.relate, include_first_step_reach=args.first_step_reach,
        total_flow_constant=args.total_flow or total_flow, restrict_support=support)


def _build(instance, config):
    if config.dimension is Dimension.X:
        if config.restrict_support is not None:
            raise UsageError("--restrict applies to the y/z models only")
        return build_x_model(instance, config)
    return build_blp(instance, config)


def _load_instance(spec: str, args=None) -> Instance:
    """A file path, a table name (abcd, graph8) or 'valleys' with layout flags."""
    name = spec.lower()
    if name in ("abcd", "graph8"):
        return gen_table_instance(name)
    if name == "valleys":
        return gen_valley_instance(_valley_spec(args))
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"no instance file or known instance named {spec!r}")
    with path.open() as fh:
        return read_instance(fh, path.stem)


def _instance_id(instance: Instance) -> dict:
    digest = hashlib.sha256(repr(instance.cost).encode()).hexdigest()[:16]
    return {"name": instance.name, "n": instance.n, "sha256": digest}


def _number(q):
    if q is None:
        return None
    q = Fraction(q)
    return int(q) if q.denominator == 1 else format_rational(q)


def _write_manifest(path, record: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n")


def _manifest_path(args, default_beside=None) -> Path:
    if getattr(args, "manifest", None):
        return Path(args.manifest)
    if default_beside is not None:
        return Path(str(default_beside) + ".manifest.json")
    return Path(f"flowcheck-{args.command}.manifest.json")


def _open_out(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.open("w", encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args, record):
    instance = _load_instance(args.instance, args)
    with _open_out(args.out) as fh:
        write_instance(instance, fh)
    record.update(instance=_instance_id(instance), outputs=[str(args.out)])
    print(f"wrote {instance.n}-node instance to {args.out}")
    return 0


def cmd_build(args, record):
    instance = _load_instance(args.instance, args)
    support = None
    if args.restrict:
        with open(args.restrict) as fh:
            support = Support.from_assignment(read_assignment(fh), Path(args.restrict).name)
    config = _config(args, support=support)
    model = _build(instance, config)
    with _open_out(args.out) as fh:
        size = emit_lp(model, fh, threads=args.threads)
    counts = _model_counts(model)
    record.update(instance=_instance_id(instance), config=config.snapshot(),
                  outputs=[str(args.out)], counts=counts, characters=size)
    if hasattr(model, "audit"):
        record["audit"] = list(model.audit)
    print(f"wrote {counts['equations']} equations over {counts['variables']} variables to {args.out}")
    return 0


def _model_counts(model) -> dict:
    equations = sum(1 for _ in model)
    variables = len(variables_of(model))
    counts = {"equations": equations, "variables": variables,
              "restricted": model.config.restrict_support is not None}
    return counts


def cmd_construct(args, record):
    flow = args.total_flow or (VALLEY32_FLOW if args.dim != "x" else 1)
    spec = _valley_spec(args, flow)
    x = construct_x_flow(spec)
    result = x
    if args.dim in ("y", "z"):
        config = counterexample_config(spec, x, Dimension(args.dim))
        y = construct_y_flow(x, config, spec.n)
        result = y if args.dim == "y" else construct_z_flow(x, y, config, spec.n)
    with _open_out(args.out) as fh:
        records = write_assignment(result, fh)
    weight = crossing_weight(spec, x)
    record.update(spec=spec.__dict__, outputs=[str(args.out)],
                  counts={"records": records}, crossing_weight=_number(weight),
                  oracle_crossings=len(spec.valleys()))
    print(f"wrote {records} records to {args.out}; crossing weight {format_rational(weight)} "
          f"(a tour needs {len(spec.valleys())})")
    return 0


def cmd_check(args, record):
    with open(args.assignment) as fh:
        a = read_assignment(fh)
    instance = _load_instance(args.instance, args) if args.instance else None
    if args.model not in ("x", "y", "z"):
        with open(args.model) as fh:
            doc = parse_lp(fh.read())
        constraints = doc.constraints
        config_snapshot = {"lp_file": args.model}
    else:
        if instance is None:
            raise UsageError("an inline model needs --instance")
        support = None
        if args.restrict == "auto":
            support = Support.from_assignment(a, "checked point")
        elif args.restrict:
            with open(args.restrict) as fh:
                support = Support.from_assignment(read_assignment(fh), Path(args.restrict).name)
        config = _config(args, total_flow=a.total_flow, support=support)
        constraints = _build(instance, config)
        config_snapshot = config.snapshot()
    report = check(constraints, a, Mode.FAIL_FAST if args.fail_fast else Mode.COLLECT,
                   instance=instance, threads=args.threads)
    for line in report.lines():
        print(line)
    print(report.summary())
    record.update(config=config_snapshot, inputs=[str(args.assignment)],
                  counts={"equations": report.total, "violations": report.violation_count,
                          "bound_violations": report.bound_violations},
                  objective=_number(report.objective))
    if instance is not None:
        record["instance"] = _instance_id(instance)
    return 0 if report.feasible else 1


# --- refute ----------------------------------------------------------------

REFUTE_SPECS = ("graph8-x", "abcd-x", "four-valleys-x", "valleys32-z", "valleys")


def _refute_case(args):
    """(instance, model config, point, oracle cost, oracle method, extras)."""
    if args.spec == "graph8-x":
        instance = gen_table_instance("graph8")
        config = ModelConfig(Dimension.X, StartMode.FREE)
        oracle = brute_force(instance)
        return instance, config, graph8_fractional_point(), oracle.optimal_cost, "brute", {}
    if args.spec == "abcd-x":
        instance = gen_table_instance("abcd")
        oracle = brute_force(instance)
        config = ModelConfig(Dimension.X, StartMode.FREE)
        point = tour_to_assignment(instance, oracle.tour)
        return instance, config, point, oracle.optimal_cost, "brute", {"tour": list(oracle.tour)}
    if args.spec == "four-valleys-x":
        args.paths, args.pairs, args.valley_size, args.dim = 1, 1, 3, "x"
    elif args.spec == "valleys32-z":
        args.paths, args.pairs, args.valley_size, args.dim = 3, 1, 12, "z"
    flow = args.total_flow or (VALLEY32_FLOW if args.dim != "x" else 1)
    spec = _valley_spec(args, flow)
    instance = gen_valley_instance(spec)
    x = construct_x_flow(spec)
    dim = Dimension(args.dim)
    if dim is Dimension.X:
        config = ModelConfig(Dimension.X, StartMode.FREE, Version(args.version),
                             total_flow_constant=flow)
        point = x
    else:
        config = counterexample_config(spec, x, dim, args.version,
                                       include_visit_constraints=args.visit_constraints)
        y = construct_y_flow(x, config, spec.n)
        point = y if dim is Dimension.Y else construct_z_flow(x, y, config, spec.n)
    started = time.perf_counter()
    oracle = branch_and_bound(instance)
    extras = {"crossing_weight": _number(crossing_weight(spec, x)),
              "oracle_crossings": len(spec.valleys()),
              "oracle_seconds": round(time.perf_counter() - started, 3),
              "structural_optimum": valley_optimum(spec)}
    return instance, config, point, oracle.optimal_cost, "branch_and_bound", extras


def cmd_refute(args, record):
    instance, config, point, oracle_cost, method, extras = _refute_case(args)
    model = _build(instance, config)
    report = check(model, point, instance=instance, threads=args.threads)
    gap = gap_report(instance, point, oracle_cost)
    for line in report.lines()[:20]:
        print(line)
    print(report.summary())
    print(f"oracle ({method}) {oracle_cost}; gap {format_rational(gap)}")
    confirmed = report.feasible and gap < 0
    print("counterexample confirmed" if confirmed else "no counterexample")
    record.update(instance=_instance_id(instance), config=config.snapshot(),
                  counts={"equations": report.total, "variables": len(point),
                          "violations": report.violation_count,
                          "bound_violations": report.bound_violations},
                  objective=_number(report.objective), oracle_cost=oracle_cost,
                  oracle_method=method, gap=_number(gap), confirmed=confirmed, **extras)
    return 0 if confirmed else 1


def cmd_solve(args, record):
    instance = _load_instance(args.instance, args)
    if args.method == "brute":
        result = brute_force(instance, args.convention)
    else:
        result = branch_and_bound(instance, count=args.count)
    print(f"optimal cost {result.optimal_cost}")
    print("tour " + " ".join(str(v) for v in result.tour))
    if result.optimal_count is not None:
        print(f"optimal tours {result.optimal_count} ({result.convention})")
    record.update(instance=_instance_id(instance), oracle_cost=result.optimal_cost,
                  tour=list(result.tour), optimal_count=result.optimal_count,
                  convention=result.convention, nodes_explored=result.nodes_explored)
    if args.histogram:
        hist = cost_histogram(instance, args.convention)
        for cost in list(hist)[:args.histogram]:
            print(f"{cost}\t{hist[cost]}")
        record["histogram"] = {str(c): hist[c] for c in list(hist)[:args.histogram]}
    return 0


# ---------------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flowcheck", description=__doc__.splitlines()[0])
    parser.add_argument("--version-info", action="version", version=f"flowcheck {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $FLOWCHECK_THREADS or 1)")
    common.add_argument("--manifest", default=None, help="where to write the run manifest")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write an instance file")
    p.add_argument("instance", nargs="?", default=None)
    p.add_argument("--instance", dest="instance_flag", default=None)
    p.add_argument("--out", required=True)
    _add_valley_flags(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", parents=[common], help="emit a model as LP text")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", required=True)
    _add_model_flags(p)
    _add_valley_flags(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("construct", parents=[common], help="build a valley counterexample point")
    p.add_argument("--dim", choices=["x", "y", "z"], default="x")
    p.add_argument("--total-flow", type=int, default=None)
    p.add_argument("--out", required=True)
    _add_valley_flags(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("check", parents=[common], help="check a point against a model")
    p.add_argument("--assignment", required=True)
    p.add_argument("--instance", default=None)
    p.add_argument("--fail-fast", action="store_true")
    _add_model_flags(p)
    _add_valley_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("refute", parents=[common], help="construct, check, solve and report the gap")
    p.add_argument("--spec", choices=REFUTE_SPECS, required=True)
    p.add_argument("--dim", choices=["x", "y", "z"], default="z")
    p.add_argument("--version", choices=["old", "new"], default="new")
    p.add_argument("--visit-constraints", action="store_true", default=None)
    p.add_argument("--total-flow", type=int, default=None)
    _add_valley_flags(p)
    p.set_defaults(func=cmd_refute)

    p = sub.add_parser("solve", parents=[common], help="exact tour optimum")
    p.add_argument("--instance", required=True)
    p.add_argument("--method", choices=["brute", "bnb"], default="brute")
    p.add_argument("--convention", choices=CONVENTIONS, default="fixed_start")
    p.add_argument("--count", action="store_true", help="count optimal tours with bnb")
    p.add_argument("--histogram", type=int, default=0, metavar="ROWS",
                   help="print the ROWS cheapest tour costs with their counts")
    _add_valley_flags(p)
    p.set_defaults(func=cmd_solve)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if args.command == "gen":
        args.instance = args.instance_flag or args.instance
        if not args.instance:
            parser.error("gen needs an instance name")
    started = time.perf_counter()
    record = {"command": args.command, "argv": list(sys.argv[1:] if argv is None else argv)}
    try:
        args.threads = resolve_threads(args.threads)
        code = args.func(args, record)
    except (UsageError, ValueError, ConstructionError, OSError) as exc:
        print(f"flowcheck {args.command}: error: {exc}", file=sys.stderr)
        code = 2
        record["error"] = str(exc)
    record["exit_code"] = code
    record["wall_seconds"] = round(time.perf_counter() - started, 3)
    out = getattr(args, "out", None)
    beside = out if out else getattr(args, "assignment", None)
    try:
        _write_manifest(_manifest_path(args, beside), record)
    except OSError as exc:
        print(f"flowcheck: could not write manifest: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
