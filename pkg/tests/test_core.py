from fractions import Fraction

import mpmath
import pytest
from hypothesis import assume, given, strategies as st

from flowcheck import (Assignment, Constraint, Dimension, Instance, ModelConfig, Relation,
                       StartMode, Version, expressiveness_gap, objective)
from flowcheck.core import (Ordering, arcs_of, format_rational, is_diagonal, key_kind,
                            key_order, ordered_map, parse_rational, relabel, resolve_threads,
                            sorted_keys)


def test_key_helpers():
    assert key_kind((1, 2, 3)) == "x"
    assert key_kind((1, 1, 2, 2, 2, 3)) == "y"
    assert key_kind(tuple(range(1, 10))) == "z"
    with pytest.raises(ValueError):
        key_kind((1, 2))
    assert is_diagonal((1, 1, 2, 1, 1, 2))
    assert not is_diagonal((1, 1, 2, 2, 2, 3))
    assert arcs_of((1, 1, 2, 2, 2, 3)) == ((1, 1, 2), (2, 2, 3))
    assert sorted_keys([(1, 1, 2, 2, 2, 3), (3, 1, 1), (1, 2, 3)]) == [
        (1, 2, 3), (3, 1, 1), (1, 1, 2, 2, 2, 3)]
    assert key_order((9, 9, 9)) < key_order((1, 1, 1, 1, 1, 1))


def test_rational_text():
    assert format_rational(Fraction(3, 18)) == "1/6"
    assert format_rational(2) == "2/1"
    assert parse_rational(" 7/21 ") == Fraction(1, 3)


def test_instance_validation():
    with pytest.raises(ValueError):
        Instance([[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        Instance([[0, 1, 2], [1, 0], [1, 2, 0]])
    with pytest.raises(ValueError):
        Instance([[0, -1, 2], [1, 0, 1], [1, 2, 0]])
    inst = Instance([[0, 1, 2], [3, 0, 4], [5, 6, 0]])
    assert inst.c(2, 3) == 4
    assert inst.tour_cost([1, 2, 3]) == 1 + 4 + 5
    with pytest.raises(IndexError):
        inst.c(0, 1)


def test_assignment_drops_zeros_and_keeps_exact_values():
    a = Assignment({(1, 1, 2): "1/3", (2, 2, 3): 0}, total_flow=1)
    assert len(a) == 1
    assert a.value((2, 2, 3)) == 0
    assert a[(1, 1, 2)] == Fraction(1, 3)
    with pytest.raises(ValueError):
        Assignment({(1, 2): 1})
    with pytest.raises(ValueError):
        Assignment({}, total_flow=0)


def test_assignment_views():
    a = Assignment({(1, 1, 2, 1, 1, 2): 2, (1, 1, 2, 2, 2, 3): 1}, total_flow=2)
    assert a.x_view() == Assignment({(1, 1, 2): 2}, 2)
    assert a.normalized().total_flow == 1
    assert a.normalized()[(1, 1, 2, 1, 1, 2)] == 1
    assert a.without((1, 1, 2, 2, 2, 3)).of_kind("y") == Assignment({(1, 1, 2, 1, 1, 2): 2}, 2)
    assert (a + a).total_flow == 4


def test_objective_reads_the_diagonal_for_lifted_points():
    inst = Instance([[0, 1, 2], [3, 0, 4], [5, 6, 0]])
    x = Assignment({(1, 1, 2): 1, (2, 2, 3): 1, (3, 3, 1): 1})
    assert objective(inst, x) == 10
    lifted = Assignment({k + k: 1 for k in x} | {(1, 1, 2, 2, 2, 3): 1})
    assert objective(inst, lifted) == 10


def test_relation_and_constraint():
    assert Relation.EQ.holds(Fraction(1, 2), Fraction(2, 4))
    assert Relation.LE.holds(1, 2) and not Relation.GE.holds(1, 2)
    con = Constraint(((1, (1, 1, 2)), (-1, (2, 2, 3))), Relation.EQ, 0, "R1_1")
    assert con.keys() == [(1, 1, 2), (2, 2, 3)]


def test_model_config_defaults_follow_the_version():
    new = ModelConfig(Dimension.Z)
    old = ModelConfig("z", "fixed", "old")
    assert not new.visit_constraints and not new.relate and not new.old_conservation
    assert old.visit_constraints and old.relate and old.old_conservation
    assert old.start_mode is StartMode.FIXED and old.version is Version.OLD
    assert not old.include_first_step_reach
    assert ModelConfig(Dimension.Y, include_visit_constraints=True).visit_constraints
    with pytest.raises(ValueError):
        ModelConfig(total_flow_constant=0)
    assert new.snapshot()["dimension"] == "z"


def test_relabel_and_threads(monkeypatch):
    assert relabel("R302_4", 10) == "R302_14"
    assert relabel("R302_4", 0) == "R302_4"
    assert relabel("free", 3) == "free"
    monkeypatch.setenv("FLOWCHECK_THREADS", "3")
    assert resolve_threads() == 3
    assert resolve_threads(2) == 2
    with pytest.raises(ValueError):
        resolve_threads(0)


@given(st.lists(st.integers(), max_size=30), st.integers(1, 8))
def test_ordered_map_keeps_input_order(items, threads):
    assert list(ordered_map(lambda v: v * 2, items, threads)) == [v * 2 for v in items]


# ---------------------------------------------------------------------------
# expressiveness gap against a high-precision floating oracle


def _mp_ordering(n, c, k):
    with mpmath.workdps(80):
        log_fact = mpmath.loggamma(n + 1)
        right = 3 * k * mpmath.log(n) + mpmath.log(c) + mpmath.log(log_fact / mpmath.log(2))
        diff = log_fact - right
    return diff


@given(st.integers(3, 80), st.integers(1, 10 ** 6), st.integers(1, 4))
def test_expressiveness_gap_matches_mpmath(n, c, k):
    diff = _mp_ordering(n, c, k)
    assume(abs(diff) > mpmath.mpf("1e-40"))
    expected = Ordering.LEFT_GREATER if diff > 0 else Ordering.RIGHT_GREATER
    assert expressiveness_gap(n, c, k) is expected


def test_expressiveness_gap_known_points():
    # small n: a cubic model dwarfs n!; n! wins once n is in the twenties
    assert expressiveness_gap(5, 1, 1) is Ordering.RIGHT_GREATER
    assert expressiveness_gap(40, 1, 1) is Ordering.LEFT_GREATER
    assert expressiveness_gap(40, 1, 10) is Ordering.RIGHT_GREATER
    with pytest.raises(ValueError):
        expressiveness_gap(2, 1, 1)


@given(st.integers(3, 60), st.integers(1, 100), st.integers(1, 3))
def test_expressiveness_gap_monotone_in_c(n, c, k):
    # a larger constant can only move the verdict towards the model side
    if expressiveness_gap(n, c * 2, k) is Ordering.LEFT_GREATER:
        assert expressiveness_gap(n, c, k) is Ordering.LEFT_GREATER
