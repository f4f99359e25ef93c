import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from flowcheck import Assignment, Constraint, Dimension, Instance, ModelConfig, Relation, StartMode, Version
from flowcheck.checker import MalformedConstraint, Mode, check, check_bounds, evaluate, gap_report
from flowcheck.checker import _ScaledValues
from flowcheck.model_blp import build_blp, lift_tour
from flowcheck.model_x import build_x_model
from flowcheck.valleys import gen_table_instance, graph8_fractional_point
from reference_blp import Reference, naive_holds


def _instance(n):
    return Instance([[(2 * i + 7 * j) % 9 + 1 for j in range(n)] for i in range(n)], f"c{n}")


def _naive(constraints, a):
    return [sum((Fraction(c) * a.value(k) for c, k in con.terms), Fraction(0)) == con.rhs
            for con in constraints]


def test_collect_and_fail_fast():
    a = Assignment({(1, 1, 2): 1, (2, 2, 3): 2})
    cons = [
        Constraint(((1, (1, 1, 2)),), Relation.EQ, 1, "R1_1"),
        Constraint(((1, (2, 2, 3)),), Relation.EQ, 1, "R1_2"),
        Constraint(((1, (2, 2, 3)), (-1, (1, 1, 2))), Relation.GE, 0, "R1_3"),
        Constraint(((1, (1, 1, 2)),), Relation.LE, 0, "R1_4"),
    ]
    report = check(cons, a)
    assert (report.total, report.satisfied, report.violation_count) == (4, 2, 2)
    assert report.lines() == ["R1_2\t2/1\t=\t1/1", "R1_4\t1/1\t<=\t0/1"]
    assert report.worst_residual == 1
    assert not report.feasible
    fast = check(cons, a, Mode.FAIL_FAST)
    assert fast.stopped_early and fast.total == 2 and fast.violation_count == 1
    capped = check(cons, a, cap=1)
    assert capped.violation_count == 2 and len(capped.violations) == 1
    assert "violated 2" in report.summary()


def test_empty_constraint_is_malformed():
    with pytest.raises(MalformedConstraint):
        check([Constraint((), Relation.EQ, 0, "R_1")], Assignment({}))


def test_bounds_and_gap():
    a = Assignment({(1, 1, 2): 3, (2, 2, 3): -1, (3, 3, 1): Fraction(1, 2)}, total_flow=2)
    assert check_bounds(a, a.total_flow) == 2
    inst = gen_table_instance("graph8")
    point = graph8_fractional_point(4)
    assert gap_report(inst, point, 79) == 4 * 75 - 4 * 79


def test_graph8_fractional_is_x_feasible():
    inst = gen_table_instance("graph8")
    report = check(build_x_model(inst, ModelConfig(Dimension.X)), graph8_fractional_point(), instance=inst)
    assert report.feasible and report.objective == 75


def test_scaled_evaluation_is_exact():
    a = Assignment({(1, 1, 2): Fraction(1, 3), (2, 2, 3): Fraction(1, 6), (3, 3, 1): Fraction(1, 2)})
    scaled = _ScaledValues(a)
    assert scaled.denominator == 6
    con = Constraint(((1, (1, 1, 2)), (1, (2, 2, 3)), (1, (3, 3, 1))), Relation.EQ, 1, "R_1")
    assert evaluate(con, scaled) == (Fraction(1), True)
    con = Constraint(((1, (1, 1, 2)),), Relation.EQ, Fraction(1, 4), "R_2")
    assert evaluate(con, scaled) == (Fraction(1, 3), False)


def test_thread_count_does_not_change_the_report():
    model = build_blp(_instance(5), ModelConfig(Dimension.Z, version=Version.OLD))
    rng = random.Random(3)
    point = lift_tour((1, 3, 5, 2, 4), Dimension.Z)
    keys = list(point)
    for key in rng.sample(keys, 10):
        point = point.with_value(key, rng.choice([0, 2, Fraction(1, 2)]))
    one = check(model, point, threads=1)
    many = check(model, point, threads=8)
    assert one == many
    assert one.violation_count > 0


# ---------------------------------------------------------------------------
# streaming verdicts equal a naive dense re-evaluation


def _random_points(n, dim, count, seed):
    """Feasible liftings, their mixtures and perturbed copies."""
    rng = random.Random(seed)
    tours = list(itertools.permutations(range(1, n + 1)))
    points = []
    while len(points) < count:
        kind = rng.randrange(3)
        t1, t2 = rng.sample(tours, 2)
        if kind == 0:
            points.append(lift_tour(t1, dim, total_flow=rng.randint(1, 3)))
            continue
        w = Fraction(rng.randint(1, 5), 6)
        mix = Assignment({k: v * w for k, v in lift_tour(t1, dim).items()})
        for k, v in lift_tour(t2, dim).items():
            mix = mix.with_value(k, mix.value(k) + v * (1 - w))
        if kind == 2:
            for _ in range(rng.randint(1, 3)):
                key = rng.choice(list(mix))
                mix = mix.with_value(key, mix.value(key) + Fraction(rng.randint(-3, 3), rng.randint(1, 4)))
        points.append(mix)
    return points


@pytest.mark.parametrize("n,dim", [(4, Dimension.Z), (5, Dimension.Z), (5, Dimension.Y)])
def test_checker_matches_naive_reference(n, dim):
    cfg = ModelConfig(dim, StartMode.FREE)
    model = build_blp(_instance(n), cfg)
    ref = Reference(n).equations(dim.value)
    constraints = list(model)
    assert len(ref) == len(constraints)
    infeasible = 0
    for point in _random_points(n, dim, 34, seed=n):
        values = dict(point.normalized())
        expected = [label for (_, terms, rhs), label in
                    zip(ref, (c.label for c in constraints)) if not naive_holds(terms, rhs, values)]
        report = check(model, point.normalized(), cap=len(constraints))
        assert [v.label for v in report.violations] == expected
        infeasible += bool(expected)
    assert 0 < infeasible < 34


@given(st.permutations(range(1, 6)), st.integers(0, 40), st.fractions(-2, 2, max_denominator=7))
def test_checker_matches_dense_sum_with_extras(tour, pick, delta):
    model = build_blp(_instance(5), ModelConfig(Dimension.Z, version=Version.OLD,
                                                include_first_step_reach=True))
    point = lift_tour(tour, Dimension.Z)
    keys = sorted(point)
    key = keys[pick % len(keys)]
    point = point.with_value(key, point.value(key) + delta)
    constraints = list(model)
    report = check(constraints, point, cap=len(constraints))
    verdicts = _naive(constraints, point)
    assert [c.label for c, ok in zip(constraints, verdicts) if not ok] == [v.label for v in report.violations]
    assert report.feasible == (delta == 0)


@given(st.permutations(range(1, 6)), st.integers(1, 50))
def test_scaling_invariance(tour, t):
    model = build_blp(_instance(5), ModelConfig(Dimension.Y, total_flow_constant=t))
    base = lift_tour(tour, Dimension.Y)
    assert check(model, base.scaled(t)).feasible


@given(st.permutations(range(1, 6)), st.randoms())
def test_shuffle_invariance(tour, rnd):
    model = build_blp(_instance(5), ModelConfig(Dimension.Y))
    point = lift_tour(tour, Dimension.Y).with_value((1, 1, 2, 2, 2, 3), Fraction(1, 3))
    constraints = list(model)
    shuffled = list(constraints)
    rnd.shuffle(shuffled)
    a, b = check(constraints, point), check(shuffled, point)
    assert a.violation_count == b.violation_count
    assert sorted(v.label for v in a.violations) == sorted(v.label for v in b.violations)
