from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from flowcheck import Dimension, ModelConfig, StartMode, Version, objective
from flowcheck.checker import check
from flowcheck.model_blp import build_blp
from flowcheck.model_x import build_x_model
from flowcheck.oracle import branch_and_bound
from flowcheck.valleys import (GRAPH8_FRACTIONAL, ConstructionError, ValleySpec, construct_x_flow,
                               construct_y_flow, construct_z_flow, counterexample_config,
                               crossing_weight, gen_table_instance, gen_valley_instance,
                               graph8_fractional_point, valley_optimum, valley_support)


def _x_feasible(spec, x):
    inst = gen_valley_instance(spec)
    model = build_x_model(inst, ModelConfig(Dimension.X, total_flow_constant=spec.total_flow))
    return check(model, x).feasible


def test_layout():
    spec = ValleySpec()
    assert spec.n == 32
    assert [v[0] for v in spec.valleys()] == ["A", "B.1", "B.2", "C"]
    assert spec.valleys()[1] == ("B.1", 5, 16)
    assert spec.path_length == 4
    seven = ValleySpec(paths=2, pairs=2, valley_size=4)
    assert [v[0] for v in seven.valleys()] == ["A", "B.1", "B.2", "C", "D.1", "D.2", "E"]
    assert seven.n == 28
    k3 = ValleySpec.generalized(3)
    assert k3.n == 120 and len(k3.valleys()) == 10


def test_layout_validation():
    with pytest.raises(ValueError):
        ValleySpec(valley_size=10, paths=3)
    with pytest.raises(ValueError):
        ValleySpec(cross_cost=20)
    with pytest.raises(ValueError):
        ValleySpec(pairs=0)


def test_instance_costs():
    spec = ValleySpec(paths=1, valley_size=3)
    inst = gen_valley_instance(spec)
    assert inst.n == 14
    assert inst.c(1, 2) == 1 and inst.c(4, 5) == 1000 and inst.c(5, 7) == 1


def test_table_instances():
    assert gen_table_instance("abcd").n == 4
    assert gen_table_instance("GRAPH8").c(6, 3) == 6
    with pytest.raises(ValueError):
        gen_table_instance("nope")
    a = graph8_fractional_point()
    assert len(a) == len(GRAPH8_FRACTIONAL) == 24
    assert objective(gen_table_instance("graph8"), a) == 75
    assert graph8_fractional_point(4)[(3, 1, 4)] == 2


# structural optimum agrees with the exact oracle
@pytest.mark.parametrize("kw", [dict(paths=1, valley_size=3), dict(paths=2, pairs=2, valley_size=4),
                                dict(), dict(paths=3, pairs=3, valley_size=12)])
def test_valley_optimum_matches_branch_and_bound(kw):
    spec = ValleySpec(**kw)
    assert branch_and_bound(gen_valley_instance(spec)).optimal_cost == valley_optimum(spec)


@pytest.mark.parametrize("kw,weight,valleys", [
    (dict(paths=1, valley_size=3), 3, 4),
    (dict(paths=1, valley_size=6), 3, 4),
    (dict(paths=2, valley_size=8), 3, 4),
    (dict(), 3, 4),
    (dict(paths=2, pairs=2, valley_size=4), 6, 7),
    (dict(paths=3, pairs=2, valley_size=6), 6, 7),
    (dict(paths=2, pairs=3, valley_size=4), 9, 10),
])
def test_crossing_weight_is_one_below_the_valley_count(kw, weight, valleys):
    spec = ValleySpec(**kw)
    x = construct_x_flow(spec)
    assert crossing_weight(spec, x) == weight
    assert len(spec.valleys()) == valleys
    assert _x_feasible(spec, x)


@given(st.sampled_from([1, 2, 3]), st.integers(1, 2), st.integers(1, 12))
def test_x_construction_scales_with_total_flow(paths, pairs, flow):
    spec = ValleySpec(paths=paths, pairs=pairs, valley_size=2 * paths, total_flow=flow)
    base = ValleySpec(paths=paths, pairs=pairs, valley_size=2 * paths)
    x, x1 = construct_x_flow(spec), construct_x_flow(base)
    assert x == x1.scaled(flow)
    # every stage carries the whole flow
    per_stage = {}
    for (_, s, _), v in x.items():
        per_stage[s] = per_stage.get(s, 0) + v
    assert set(per_stage.values()) == {flow}
    # each group saves one crossing, so the average saving is one
    assert crossing_weight(spec, x) == len(spec.valleys()) - 1


def test_x_construction_rejects_many_paths():
    with pytest.raises(ValueError):
        construct_x_flow(ValleySpec(paths=4, valley_size=8))


def test_valley_support_pair_filter():
    spec = ValleySpec()
    x = construct_x_flow(spec)
    sup = valley_support(spec, x)
    b1 = min(a for a in sup.arcs if 5 <= a[0] <= 16 and 5 <= a[2] <= 16)
    b2 = next(a for a in sorted(sup.arcs)
              if 17 <= a[0] <= 28 and 17 <= a[2] <= 28 and a[1] > b1[1])
    assert not sup.pair_allowed(b1, b2)
    lead = next(a for a in sup.arcs if a[0] == 1)
    assert sup.pair_allowed(lead, b1) and sup.pair_allowed(lead, b2)
    assert valley_support(ValleySpec(paths=2, pairs=2, valley_size=4),
                          construct_x_flow(ValleySpec(paths=2, pairs=2, valley_size=4))).pair_allowed is None


def test_y_and_z_constructions_need_enough_paths():
    spec = ValleySpec(paths=1, valley_size=3)
    x = construct_x_flow(spec)
    with pytest.raises(ConstructionError):
        construct_y_flow(x, counterexample_config(spec, x, Dimension.Y), spec.n)
    spec = ValleySpec(paths=2, valley_size=8)
    x = construct_x_flow(spec)
    cfg = counterexample_config(spec, x, Dimension.Z)
    y = construct_y_flow(x, cfg, spec.n)
    with pytest.raises(ConstructionError) as err:
        construct_z_flow(x, y, cfg, spec.n)
    assert err.value.stage > 1


def test_two_path_y_construction_is_feasible():
    spec = ValleySpec(paths=2, valley_size=8, total_flow=16 * 81)
    x = construct_x_flow(spec)
    cfg = counterexample_config(spec, x, Dimension.Y, version="old")
    y = construct_y_flow(x, cfg, spec.n)
    inst = gen_valley_instance(spec)
    model = build_blp(inst, ModelConfig(Dimension.Y, StartMode.FREE, Version.OLD,
                                        include_visit_constraints=False,
                                        total_flow_constant=spec.total_flow,
                                        restrict_support=cfg.restrict_support))
    report = check(model, y, instance=inst)
    assert report.feasible
    assert report.objective < spec.total_flow * valley_optimum(spec)


def test_y_values_split_uniformly(valley32):
    y = valley32.y
    x = valley32.x
    for (i, s, j), v in list(x.items())[:40]:
        a = (i, s, j)
        assert y[a + a] == v
        later = {}
        for key, val in y.items():
            if key[:3] == a and key[3:] != a:
                later[key[4]] = later.get(key[4], 0) + val
        assert set(later.values()) == {v}
        assert set(later) == set(range(s + 1, valley32.spec.n + 1))


def test_z_stage_sums_match_y(valley32):
    sums = {}
    for key, v in valley32.z.items():
        if len(key) == 9:
            sums[(key[:6], key[7])] = sums.get((key[:6], key[7]), 0) + v
    some = list(sums.items())[:500]
    assert some
    for (ykey, _), total in some:
        assert total == valley32.y[ykey]
    assert all(isinstance(v, Fraction) and v.denominator == 1 for v in valley32.z.values())
