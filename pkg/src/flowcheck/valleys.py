"""Benchmark instances and the flow-splitting constructions.

Valley instances group nodes into clusters ("valleys").  Moving inside a
valley is cheap (``in_cost``), moving between valleys crosses a mountain
(``cross_cost``).  A middle *pair* of valleys can be traversed either in
series (one valley after the other) or in parallel (half of the flow in
each valley, every node visited twice by that half), which is the trick
that saves a crossing in the relaxation.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import Assignment, Instance, ModelConfig, StartMode
from .model_blp import BlpIndex, Support

TABLE_COSTS = {
    "ABCD": (
        (99, 10, 20, 20),
        (20, 99, 25, 25),
        (20, 14, 99, 25),
        (20, 14, 25, 99),
    ),
    "GRAPH8": (
        (99, 5, 15, 15, 15, 15, 15, 15),
        (15, 99, 5, 15, 15, 15, 15, 15),
        (15, 15, 99, 10, 15, 15, 15, 15),
        (10, 15, 15, 99, 15, 15, 15, 15),
        (15, 15, 15, 15, 99, 8, 15, 15),
        (12, 15, 6, 15, 15, 99, 17, 15),
        (15, 15, 15, 15, 15, 15, 99, 7),
        (13, 15, 7, 15, 18, 15, 15, 99),
    ),
}

# fractional optimum of the x-model on GRAPH8 (cost 75, below the tour optimum 79)
GRAPH8_FRACTIONAL = (
    ((3, 1, 4), "1/2"), ((6, 1, 5), "1/4"), ((8, 1, 7), "1/4"),
    ((4, 2, 1), "1/2"), ((5, 2, 6), "1/4"), ((7, 2, 8), "1/4"),
    ((1, 3, 2), "1/2"), ((6, 3, 5), "1/4"), ((8, 3, 7), "1/4"),
    ((2, 4, 3), "1/2"), ((5, 4, 6), "1/4"), ((7, 4, 8), "1/4"),
    ((3, 5, 4), "1/2"), ((6, 5, 5), "1/4"), ((8, 5, 7), "1/4"),
    ((4, 6, 1), "1/2"), ((5, 6, 6), "1/4"), ((7, 6, 8), "1/4"),
    ((1, 7, 2), "1/2"), ((6, 7, 5), "1/4"), ((8, 7, 7), "1/4"),
    ((2, 8, 3), "1/2"), ((5, 8, 6), "1/4"), ((7, 8, 8), "1/4"),
)


class ConstructionError(ValueError):
    """A conditioned flow has nowhere to go at some stage."""

    def __init__(self, key, stage):
        self.key = key
        self.stage = stage
        super().__init__(f"no admissible continuation of {key} at stage {stage}")


def gen_table_instance(name: str) -> Instance:
    key = name.upper()
    if key not in TABLE_COSTS:
        raise ValueError(f"unknown table instance {name!r}; choose from {sorted(TABLE_COSTS)}")
    return Instance(TABLE_COSTS[key], key.lower())


def graph8_fractional_point(total_flow: int = 1) -> Assignment:
    return Assignment({k: Fraction(v) * total_flow for k, v in GRAPH8_FRACTIONAL}, total_flow)


# ---------------------------------------------------------------------------
# valley instances


@dataclass(frozen=True)
class ValleySpec:
    """Layout: lead-in valley, then per pair two valleys of ``valley_size``
    nodes (with a separator valley between consecutive pairs), then the
    lead-out valley.  Each pair valley holds ``paths`` parallel paths of
    ``valley_size // paths`` nodes."""

    lead_in: int = 4
    lead_out: int = 4
    valley_size: int = 12
    paths: int = 3
    pairs: int = 1
    cross_cost: int = 1000
    in_cost: int = 1
    separator_size: Optional[int] = None
    total_flow: int = 1

    def __post_init__(self):
        if self.separator_size is None:
            object.__setattr__(self, "separator_size", self.lead_out)
        if min(self.lead_in, self.lead_out, self.separator_size, self.valley_size,
               self.paths, self.pairs) < 1:
            raise ValueError("valley sizes, paths and pairs must be positive")
        if self.valley_size % self.paths:
            raise ValueError(f"valley_size {self.valley_size} is not divisible by paths {self.paths}")
        if self.cross_cost <= self.n * self.in_cost:
            raise ValueError("cross_cost must exceed n * in_cost so crossings dominate")
        if self.total_flow < 1:
            raise ValueError("total_flow must be a positive integer")

    @classmethod
    def generalized(cls, k: int, **kw) -> "ValleySpec":
        """The k-dimension family: k pairs, k paths, every valley 3*2**(k-1) nodes."""
        size = 3 * 2 ** (k - 1)
        return cls(lead_in=size, lead_out=size, valley_size=size, paths=k, pairs=k,
                   separator_size=size, **kw)

    @property
    def path_length(self) -> int:
        return self.valley_size // self.paths

    @property
    def n(self) -> int:
        return (self.lead_in + 2 * self.pairs * self.valley_size
                + (self.pairs - 1) * self.separator_size + self.lead_out)

    def valleys(self) -> list:
        """(name, first node, last node) in numbering order."""
        out = []
        start = 1

        def add(name, size):
            nonlocal start
            out.append((name, start, start + size - 1))
            start += size

        add("A", self.lead_in)
        for g in range(self.pairs):
            letter = chr(ord("B") + 2 * g)
            add(f"{letter}.1", self.valley_size)
            add(f"{letter}.2", self.valley_size)
            if g < self.pairs - 1:
                add(chr(ord(letter) + 1), self.separator_size)
        add(chr(ord("B") + 2 * self.pairs - 1), self.lead_out)
        return out

    def valley_index(self) -> list:
        """valley_index()[node] is the position of the node's valley in valleys()."""
        index = [None]
        for v, (_, lo, hi) in enumerate(self.valleys()):
            index += [v] * (hi - lo + 1)
        return index


def gen_valley_instance(spec: ValleySpec) -> Instance:
    where = spec.valley_index()
    n = spec.n
    cost = [[spec.in_cost if where[i] == where[j] else spec.cross_cost
             for j in range(1, n + 1)] for i in range(1, n + 1)]
    name = f"valleys-p{spec.paths}-x{spec.pairs}-n{n}"
    return Instance(cost, name)


def valley_optimum(spec: ValleySpec) -> int:
    """Tour optimum of a valley instance.

    Each valley must be entered at least once, so a tour crosses at least
    once per valley; walking the valleys in order achieves that, and every
    other arc costs ``in_cost``.
    """
    v = len(spec.valleys())
    return v * spec.cross_cost + (spec.n - v) * spec.in_cost


def crossing_weight(spec: ValleySpec, a: Assignment) -> Fraction:
    """Mountain crossings of an x point, in units of total flow."""
    where = spec.valley_index()
    x = a.x_view()
    total = sum((value for (i, _, j), value in x.items() if where[i] != where[j]), Fraction(0))
    return total / a.total_flow


# ---------------------------------------------------------------------------
# x construction


def _slots(spec: ValleySpec, parallel: int) -> list:
    """Visit slots of one flow group; each slot is a list of lanes
    (valley id, nodes) sharing the group weight equally.

    Pair ``parallel`` is split between its two valleys; every other pair is
    walked in series.
    """
    valleys = spec.valleys()
    L = spec.path_length
    slots = []
    v = 0

    def singles(valley):
        _, lo, hi = valleys[valley]
        return [[(valley, [node])] for node in range(lo, hi + 1)]

    def positions(valley, count):
        _, lo, _ = valleys[valley]
        out = []
        for m in range(count):
            q = m % L
            out.append((valley, [lo + a * L + q for a in range(spec.paths)]))
        return out

    slots += singles(v)
    v += 1
    for g in range(spec.pairs):
        first, second = v, v + 1
        if g == parallel:
            twice = 2 * spec.valley_size
            slots += [[a, b] for a, b in zip(positions(first, twice), positions(second, twice))]
        else:
            slots += [[lane] for lane in positions(first, spec.valley_size)]
            slots += [[lane] for lane in positions(second, spec.valley_size)]
        v += 2
        if g < spec.pairs - 1:
            slots += singles(v)
            v += 1
    slots += singles(v)
    return slots


def construct_x_flow(spec: ValleySpec) -> Assignment:
    """Crossing-saving x point: one flow group per pair, group g splits pair g
    and walks the others in series; groups carry equal weight."""
    if spec.paths not in (1, 2, 3):
        raise ValueError(f"no construction for paths={spec.paths} (supported: 1, 2, 3)")
    n = spec.n
    values = defaultdict(Fraction)
    group_weight = Fraction(spec.total_flow, spec.pairs)
    for g in range(spec.pairs):
        slots = _slots(spec, g)
        assert len(slots) == n
        for s in range(1, n + 1):
            here, there = slots[s - 1], slots[s % n]
            if len(here) == len(there):
                moves = [(lane, other, Fraction(1, len(here))) for lane, other in zip(here, there)]
            else:
                # fan out into (or merge from) the two valleys of a split pair
                moves = [(lane, other, Fraction(1, len(here) * len(there)))
                         for lane in here for other in there]
            for (_, tails), (_, heads), share in moves:
                w = group_weight * share / (len(tails) * len(heads))
                for i in tails:
                    for j in heads:
                        values[(i, s, j)] += w
    return Assignment(values, spec.total_flow)


# ---------------------------------------------------------------------------
# y / z construction


def valley_support(spec: ValleySpec, x: Assignment) -> Support:
    """Support of a constructed x point.

    For a single split pair, flow conditioned on an arc of one pair valley
    never reaches the other valley of the pair; the pair filter encodes
    that.  An arc belongs to the valley of its tail, or to the valley of its
    head when it enters the pair.
    """
    arcs = frozenset(x.x_view())
    if spec.pairs != 1:
        return Support(arcs, None, f"valleys-p{spec.paths}-x{spec.pairs}")
    where = spec.valley_index()
    pair = {1, 2}

    def side(arc):
        i, _, j = arc
        if where[i] in pair:
            return where[i]
        if where[j] in pair:
            return where[j]
        return None

    def allowed(a, b):
        sa, sb = side(a), side(b)
        return sa is None or sb is None or sa == sb

    return Support(arcs, allowed, f"valleys-p{spec.paths}")


def _index(x: Assignment, config: ModelConfig, n: int) -> BlpIndex:
    if config.restrict_support is None:
        config = ModelConfig(config.dimension, config.start_mode, config.version,
                             total_flow_constant=config.total_flow_constant,
                             restrict_support=Support(frozenset(x.x_view())))
    return BlpIndex(n, config)


def _node_count(x: Assignment) -> int:
    return max(max(k[0], k[2]) for k in x.x_view())


def _later_by_stage(index: BlpIndex, a) -> dict:
    out = defaultdict(list)
    for b in index.after[a]:
        out[b[1]].append(b)
    return out


def construct_y_flow(x: Assignment, config: ModelConfig, n: Optional[int] = None) -> Assignment:
    """Spread each arc's flow uniformly over its admissible continuations at
    every later stage.  The diagonal carries the arc's own value."""
    x = x.x_view()
    n = n or _node_count(x)
    index = _index(x, config, n)
    values = {}
    for a in index.arcs:
        base = x.value(a)
        if not base:
            continue
        values[a + a] = base
        later = _later_by_stage(index, a)
        for p in range(a[1] + 1, n + 1):
            targets = later.get(p)
            if not targets:
                raise ConstructionError(a, p)
            share = base / len(targets)
            for b in targets:
                values[a + b] = share
    return Assignment._trusted(values, x.total_flow)


def construct_z_flow(x: Assignment, y: Assignment, config: ModelConfig,
                     n: Optional[int] = None) -> Assignment:
    """Spread each off-diagonal y value uniformly over the arcs admissible
    with both conditioning arcs at every later stage.  Returns y and z keys."""
    x = x.x_view()
    n = n or _node_count(x)
    index = _index(x, config, n)
    values = dict(y.items())
    later = {}
    for key, base in y.items():
        a, b = key[:3], key[3:]
        if a == b:
            continue
        if b not in later:
            later[b] = index.after.get(b, set())
        common = index.after[a] & later[b]
        by_stage = defaultdict(list)
        for c in common:
            by_stage[c[1]].append(c)
        for r in range(b[1] + 1, n + 1):
            targets = by_stage.get(r)
            if not targets:
                raise ConstructionError(key, r)
            share = base / len(targets)
            for c in targets:
                values[key + c] = share
    return Assignment._trusted(values, y.total_flow)


def counterexample_config(spec: ValleySpec, x: Assignment, dimension, version="new",
                          **flags) -> ModelConfig:
    """Support-restricted configuration used for a valley counterexample run."""
    return ModelConfig(dimension=dimension, start_mode=StartMode.FREE, version=version,
                       total_flow_constant=spec.total_flow,
                       restrict_support=valley_support(spec, x), **flags)


__all__ = [
    "ConstructionError", "TABLE_COSTS", "GRAPH8_FRACTIONAL", "ValleySpec", "construct_x_flow",
    "construct_y_flow", "construct_z_flow", "counterexample_config", "crossing_weight",
    "gen_table_instance", "gen_valley_instance", "graph8_fractional_point", "valley_optimum",
    "valley_support",
]
