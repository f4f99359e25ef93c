"""The y/z ("BLP") model: admissibility, support restriction and the
constraint families R3.2 .. R3.18 plus the old-version extras.

Loop order inside every family is fixed, so labels
(``R<family>_<ordinal>``) are stable.  Iteration itself runs over support
indexes instead of full ``1..M`` ranges; a pattern with two or more
wildcards is always treated as present.
"""

from __future__ import annotations

import functools
import itertools
from collections import defaultdict
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass, field
from typing import Optional

from .core import (Assignment, Constraint, Dimension, Instance, ModelConfig, Relation,
                   StartMode, VarKey, key_order)

NEW_FAMILIES = tuple(f"R3.{n}" for n in range(2, 19))
Y_FAMILIES = tuple(f"R3.{n}" for n in range(2, 8))
EXTRA_FAMILIES = ("OLD2.18", "OLD2.24", "VISIT2.13", "RELATE_I", "RELATE_II")

LABELS = {f"R3.{n}": f"3{n:02d}" for n in range(2, 19)}
LABELS.update({"OLD2.18": "OLD218", "OLD2.24": "OLD224", "VISIT2.13": "VISIT213",
               "RELATE_I": "RELATE1", "RELATE_II": "RELATE2"})

# corrections to the family definitions, always applied
CORRECTIONS = (
    "3.3: stage index of the 'caused by first step' family starts at 3",
    "3.8: no t != j exclusion (j does not occur in the body)",
    "3.9: no k != j / t != j exclusions (j does not occur in the body)",
    "3.18: loop indices renamed to the k, t used in the body",
    "3.23: first-step visit family starts at stage 3",
)
RANGE_NOTE = ("2.19/2.20 stage ranges are widened so that every admissible y variable "
              "is reached")


def blp_families(config: ModelConfig) -> tuple:
    """Families enabled by a configuration, in emission order."""
    if config.dimension is Dimension.X:
        raise ValueError("the BLP families need dimension Y or Z")
    fams = list(Y_FAMILIES if config.dimension is Dimension.Y else NEW_FAMILIES)
    if config.old_conservation:
        fams.append("OLD2.18")
    if config.include_first_step_reach:
        fams.append("OLD2.24")
    if config.relate:
        fams += ["RELATE_I", "RELATE_II"]
    if config.visit_constraints:
        fams.append("VISIT2.13")
    return tuple(fams)


# ---------------------------------------------------------------------------
# admissibility


def admissible_x(i, s, j, M, R, start_mode=StartMode.FREE) -> bool:
    if not (1 <= i <= M and 1 <= j <= M and 1 <= s <= R) or i == j:
        return False
    if start_mode is StartMode.FIXED:
        # node 1 is left at stage 1 and re-entered at stage R, nowhere else
        if (i == 1) != (s == 1) or (j == 1) != (s == R):
            return False
    return True


def admissible_y(i, s, j, u, p, v, config: ModelConfig, M: int, R: int) -> bool:
    """Structural test for y(i,s,j,u,p,v), ignoring any support restriction."""
    mode = config.start_mode if config is not None else StartMode.FREE
    if not (admissible_x(i, s, j, M, R, mode) and admissible_x(u, p, v, M, R, mode)):
        return False
    if p < s:
        return False
    if p == s:
        return i == u and j == v
    if p == s + 1 and j != u:
        return False
    # revisits; the closing arc may return to the start node of stage 1
    if i == v and (s > 1 or p < R):
        return False
    if i == u or j == v:
        return False
    if p > s + 1 and j == u:
        return False
    return True


def admissible_z(i, s, j, u, p, v, k, r, t, config: ModelConfig, M: int, R: int) -> bool:
    if not s < p < r:
        return False
    return (admissible_y(i, s, j, u, p, v, config, M, R)
            and admissible_y(i, s, j, k, r, t, config, M, R)
            and admissible_y(u, p, v, k, r, t, config, M, R))


def admissible(key: VarKey, config: ModelConfig, M: int, R: int) -> bool:
    mode = config.start_mode if config is not None else StartMode.FREE
    if len(key) == 3:
        return admissible_x(*key, M, R, mode)
    if len(key) == 6:
        return admissible_y(*key, config, M, R)
    if len(key) == 9:
        return admissible_z(*key, config, M, R)
    return False


# ---------------------------------------------------------------------------
# support restriction


@dataclass(frozen=True)
class Support:
    """Arcs that may carry flow, plus an optional filter on ordered arc pairs.

    A y (or z) variable outside the support is known to be zero, so the
    generator never mentions it.
    """

    arcs: frozenset
    pair_allowed: Optional[Callable] = field(default=None, compare=False)
    name: str = ""

    @classmethod
    def from_assignment(cls, a: Assignment, name: str = "") -> "Support":
        """Support read off a point: every arc it mentions and, when it has
        y keys, exactly the ordered pairs it mentions."""
        arcs = set()
        pairs = set()
        for key in a:
            for n in range(0, len(key), 3):
                arcs.add(key[n:n + 3])
            if len(key) == 6 and key[:3] != key[3:]:
                pairs.add((key[:3], key[3:]))
        if pairs:
            return cls(frozenset(arcs), lambda x, y: (x, y) in pairs, name)
        return cls(frozenset(arcs), None, name)


class BlpIndex:
    """Lookup tables over the admissible support of one (instance, config)."""

    def __init__(self, n: int, config: ModelConfig):
        self.M = self.R = M = R = n
        self.config = config
        mode = config.start_mode
        support = config.restrict_support
        if support is None:
            arcs = [(i, s, j) for s in range(1, R + 1) for i in range(1, M + 1)
                    for j in range(1, M + 1) if admissible_x(i, s, j, M, R, mode)]
            pair_allowed = None
        else:
            arcs = [a for a in support.arcs if admissible_x(*a, M, R, mode)]
            pair_allowed = support.pair_allowed
        self.arcs = sorted(arcs, key=lambda a: (a[1], a[0], a[2]))
        self.arc_set = frozenset(self.arcs)
        self.by_stage = defaultdict(list)
        self.tails = defaultdict(list)   # (i, s) -> [j]
        self.heads = defaultdict(list)   # (s, j) -> [i]
        stages = defaultdict(list)       # (i, j) -> [s]
        for i, s, j in self.arcs:
            self.by_stage[s].append((i, s, j))
            self.tails[(i, s)].append(j)
            self.heads[(s, j)].append(i)
            stages[(i, j)].append(s)
        for table in (self.tails, self.heads, stages):
            for value in table.values():
                value.sort()
        self.stages = dict(stages)
        self.pairs = sorted(stages)                       # (i, j) with some stage
        self.pairs_from = defaultdict(list)
        for i, j in self.pairs:
            self.pairs_from[i].append(j)
        # after[a]: arcs b at a later stage with y(a, b) admissible and supported
        self.after = {}
        for a in self.arcs:
            later = set()
            for b in self.arcs:
                if b[1] > a[1] and admissible_y(*a, *b, config, M, R) and (
                        pair_allowed is None or pair_allowed(a, b)):
                    later.add(b)
            self.after[a] = later

    def x(self, i, s, j) -> bool:
        return (i, s, j) in self.arc_set

    def y(self, a, b) -> bool:
        if a == b:
            return a in self.arc_set
        after = self.after.get(a)
        return after is not None and b in after

    def z(self, a, b, c) -> bool:
        after = self.after.get(a)
        return after is not None and b in after and c in after and c in self.after[b]

    def y_keys(self) -> Iterator:
        for a in self.arcs:
            yield a + a
        for a in self.arcs:
            for b in sorted(self.after[a], key=lambda b: (b[1], b[0], b[2])):
                yield a + b

    def z_keys(self) -> Iterator:
        for a in self.arcs:
            for b in sorted(self.after[a], key=lambda b: (b[1], b[0], b[2])):
                common = self.after[a] & self.after[b]
                for c in sorted(common, key=lambda c: (c[1], c[0], c[2])):
                    yield a + b + c


# ---------------------------------------------------------------------------
# families


def _family_generators(ix: BlpIndex, flow: int) -> dict:
    M, R = ix.M, ix.R
    nodes = range(1, M + 1)
    xok, yok, zok = ix.x, ix.y, ix.z
    tails, heads, stages, by_stage = ix.tails, ix.heads, ix.stages, ix.by_stage
    pairs, pairs_from = ix.pairs, ix.pairs_from

    def stage_range(pair, lo, hi):
        return [s for s in stages.get(pair, ()) if lo <= s <= hi]

    def r302():
        terms = [(1, a + a) for a in by_stage[1]]
        yield terms, flow

    def r303():
        for a in by_stage[2]:
            i, _, j = a
            terms = [(1, a + a)]
            for u in heads[(1, i)]:
                b = (u, 1, i)
                if u not in (i, j) and yok(b, a):
                    terms.append((-1, b + a))
            yield terms, 0

    def r304():
        for i, j in pairs:
            for r in stage_range((i, j), 3, R):
                a = (i, r, j)
                terms = [(1, a + a)]
                for u in nodes:
                    if u == i or (u == j and r < R):
                        continue
                    for v in tails[(u, 1)]:
                        b = (u, 1, v)
                        if v not in (i, j, u) and yok(b, a):
                            terms.append((-1, b + a))
                yield terms, 0

    def r305():
        for i, j in pairs:
            for r in stage_range((i, j), 1, R - 2):
                a = (i, r, j)
                terms = [(1, a + a)]
                for t in tails[(j, r + 1)]:
                    b = (j, r + 1, t)
                    if t not in (i, j) and yok(a, b):
                        terms.append((-1, a + b))
                yield terms, 0

    def r306():
        for i, j in pairs:
            for r in stage_range((i, j), 1, R - 3):
                a = (i, r, j)
                for t in tails[(j, r + 1)]:
                    if t in (i, j):
                        continue
                    b = (j, r + 1, t)
                    terms = [(1, a + b)] if yok(a, b) else []
                    for k in tails[(t, r + 2)]:
                        c = (t, r + 2, k)
                        if k not in (i, j, t) and yok(a, c):
                            terms.append((-1, a + c))
                    yield terms, 0

    def r307():
        # conditioned flow entering t at stage s leaves t at stage s+1
        for i, j in pairs:
            for t in nodes:
                if t in (i, j):
                    continue
                for r in stage_range((i, j), 1, R - 4):
                    a = (i, r, j)
                    for s in range(r + 2, R - 1):
                        if not (tails.get((t, s + 1)) or heads.get((s, t))):
                            continue
                        terms = []
                        for k in nodes:
                            if (k == i and (r > 1 or s < R - 1)) or k in (j, t):
                                continue
                            into, out = (k, s, t), (t, s + 1, k)
                            if not (xok(*out) or xok(*into)):
                                continue
                            if yok(a, into):
                                terms.append((1, a + into))
                            if yok(a, out):
                                terms.append((-1, a + out))
                        if terms:
                            yield terms, 0

    def chains():
        # (i, u, v, p) with arcs (i,p-1,u), (u,p,v) and y between them
        for i, u in pairs:
            for v in pairs_from[u]:
                if v in (i, u):
                    continue
                for p in stage_range((u, v), 2, R - 2):
                    a, b = (i, p - 1, u), (u, p, v)
                    if xok(*a) and yok(a, b):
                        yield i, u, v, p, a, b

    def r308():
        for i, u, v, p, a, b in chains():
            terms = [(1, a + b)]
            for t in tails[(v, p + 1)]:
                c = (v, p + 1, t)
                if t not in (i, u, v) and zok(a, b, c):
                    terms.append((-1, a + b + c))
            yield terms, 0

    def r309():
        for i, u, v, p, a, b in chains():
            for s in range(p + 2, R + 1):
                terms = [(1, a + b)]
                for c in by_stage[s]:
                    k, _, t = c
                    if k in (i, u, v):
                        continue
                    if (t == i and (s < R or p > 2)) or t in (u, v, k):
                        continue
                    if zok(a, b, c):
                        terms.append((-1, a + b + c))
                yield terms, 0

    def spread_pairs(p_lo, p_hi):
        # (i, j, u, v, p, r): y between (i,r,j) and (u,p,v), r <= p - 2
        for i, j in pairs:
            for u, v in pairs:
                if u in (i, j) or v in (i, j, u):
                    continue
                for p in stage_range((u, v), p_lo, p_hi):
                    b = (u, p, v)
                    for r in stage_range((i, j), 1, p - 2):
                        a = (i, r, j)
                        if yok(a, b):
                            yield i, j, u, v, p, r, a, b

    def r310():
        for i, j, u, v, p, r, a, b in spread_pairs(3, R - 2):
            terms = [(1, a + b)]
            for t in tails[(v, p + 1)]:
                if (t == i and (r > 1 or p < R - 1)) or t in (j, u, v):
                    continue
                c = (v, p + 1, t)
                if zok(a, b, c):
                    terms.append((-1, a + b + c))
            yield terms, 0

    def r311():
        for i, j, u, v, p, r, a, b in spread_pairs(3, R - 3):
            for s in range(p + 2, R + 1):
                terms = [(1, a + b)]
                for c in by_stage[s]:
                    k, _, t = c
                    if k in (i, j, u, v):
                        continue
                    if (t == i and (s < R or r > 1)) or t in (j, u, v, k):
                        continue
                    if zok(a, b, c):
                        terms.append((-1, a + b + c))
                yield terms, 0

    def outer_pairs(t_may_be_i):
        for i, j in pairs:
            for k, t in pairs:
                if k in (i, j) or t in (j, k) or (t == i and not t_may_be_i):
                    continue
                yield i, j, k, t

    def r312():
        for i, j, k, t in outer_pairs(False):
            for r in stage_range((i, j), 1, R - 3):
                a, c = (i, r, j), (k, r + 2, t)
                if xok(*c) and yok(a, c):
                    terms = [(1, a + c)]
                    b = (j, r + 1, k)
                    if zok(a, b, c):
                        terms.append((-1, a + b + c))
                    yield terms, 0

    def far_pairs(gap):
        # first arc no later than R - gap - 1, last arc at least gap stages after it
        for i, j, k, t in outer_pairs(True):
            for r in stage_range((i, j), 1, R - gap - 1):
                a = (i, r, j)
                for s in stage_range((k, t), r + gap, R):
                    if i == t and (r > 1 or s < R):
                        continue
                    c = (k, s, t)
                    if yok(a, c):
                        yield i, j, k, t, r, s, a, c

    def r313():
        # middle arc right after the first one
        for i, j, k, t, r, s, a, c in far_pairs(3):
            terms = [(1, a + c)]
            for v in tails[(j, r + 1)]:
                b = (j, r + 1, v)
                if v not in (i, j, k, t) and zok(a, b, c):
                    terms.append((-1, a + b + c))
            yield terms, 0

    def r314():
        # middle arc right before the last one
        for i, j, k, t, r, s, a, c in far_pairs(3):
            terms = [(1, a + c)]
            for u in heads[(s - 1, k)]:
                b = (u, s - 1, k)
                if u not in (i, j, k, t) and zok(a, b, c):
                    terms.append((-1, a + b + c))
            yield terms, 0

    def r315():
        for i, j, k, t, r, s, a, c in far_pairs(4):
            for p in range(r + 2, s - 1):
                terms = [(1, a + c)]
                for b in by_stage[p]:
                    u, _, v = b
                    if u in (i, j, k, t) or v in (i, j, k, t, u):
                        continue
                    if zok(a, b, c):
                        terms.append((-1, a + b + c))
                yield terms, 0

    def adjacent_after():
        for u, v in pairs:
            for t in pairs_from[v]:
                if t in (u, v):
                    continue
                for p in range(2, R - 1):
                    b, c = (u, p, v), (v, p + 1, t)
                    if yok(b, c):
                        yield u, v, t, p, b, c

    def r316():
        for u, v, t, p, b, c in adjacent_after():
            terms = [(1, b + c)]
            for i in heads[(p - 1, u)]:
                a = (i, p - 1, u)
                if i not in (u, v, t) and zok(a, b, c):
                    terms.append((-1, a + b + c))
            yield terms, 0

    def r317():
        for u, v, t, p, b, c in adjacent_after():
            if p < 3:
                continue
            for r in range(1, p - 1):
                terms = [(1, b + c)]
                for a in by_stage[r]:
                    i, _, j = a
                    if i in (u, v) or (i == t and (r > 1 or p < R - 1)):
                        continue
                    if j not in (u, v, t, i) and zok(a, b, c):
                        terms.append((-1, a + b + c))
                yield terms, 0

    def r318():
        for u, v in pairs:
            for k, t in pairs:
                if k in (u, v) or t in (u, v, k):
                    continue
                for p in stage_range((u, v), 2, R - 3):
                    b = (u, p, v)
                    for s in stage_range((k, t), p + 2, R):
                        c = (k, s, t)
                        if not yok(b, c):
                            continue
                        for r in range(1, p):
                            terms = [(1, b + c)]
                            for a in by_stage[r]:
                                i, _, j = a
                                if i in (u, v) or j in (v, k, t, i):
                                    continue
                                if zok(a, b, c):
                                    terms.append((-1, a + b + c))
                            yield terms, 0

    # --- old-version and optional families -------------------------------

    def old218():
        for s in range(1, R + 1):
            nxt = s % R + 1
            for j in nodes:
                terms = [(1, (i, s, j) * 2) for i in heads[(s, j)]]
                terms += [(-1, (j, nxt, k) * 2) for k in tails[(j, nxt)]]
                if terms:
                    yield terms, 0

    def old224():
        for a in by_stage[1]:
            i, _, j = a
            for t in nodes:
                if t in (i, j):
                    continue
                terms = [(1, a + a)]
                for r in range(2, R + 1):
                    for k in heads[(r, t)]:
                        c = (k, r, t)
                        if yok(a, c):
                            terms.append((-1, a + c))
                yield terms, 0

    def relate1():
        for a in ix.arcs:
            for p in range(a[1] + 1, R + 1):
                terms = [(1, a + a)] + [(-1, a + b) for b in by_stage[p] if yok(a, b)]
                yield terms, 0

    def relate2():
        for a in ix.arcs:
            for p in range(1, a[1]):
                terms = [(1, a + a)] + [(-1, b + a) for b in by_stage[p] if yok(b, a)]
                yield terms, 0

    def visit_y():
        # conditioned on (i,s,j), every other node t is entered exactly once
        for a in ix.arcs:
            i, s, j = a
            for t in nodes:
                if t == j:
                    continue
                terms = [(1, a + a)]
                for r in range(1, R + 1):
                    for k in heads[(r, t)]:
                        c = (k, r, t)
                        if r > s and yok(a, c):
                            terms.append((-1, a + c))
                        elif r < s and yok(c, a):
                            terms.append((-1, c + a))
                yield terms, 0

    def visit_z():
        # conditioned on a first-stage arc and a later arc (stage >= 3)
        for a in by_stage[1]:
            v = a[2]
            for b in sorted(ix.after[a], key=lambda b: (b[1], b[0], b[2])):
                s, j = b[1], b[2]
                if s < 3:
                    continue
                for t in nodes:
                    if t in (v, j):
                        continue
                    terms = [(1, a + b)]
                    for r in range(2, R + 1):
                        if r == s:
                            continue
                        for k in heads[(r, t)]:
                            c = (k, r, t)
                            if r > s and zok(a, b, c):
                                terms.append((-1, a + b + c))
                            elif r < s and zok(a, c, b):
                                terms.append((-1, a + c + b))
                    yield terms, 0

    return {
        "R3.2": r302, "R3.3": r303, "R3.4": r304, "R3.5": r305, "R3.6": r306,
        "R3.7": r307, "R3.8": r308, "R3.9": r309, "R3.10": r310, "R3.11": r311,
        "R3.12": r312, "R3.13": r313, "R3.14": r314, "R3.15": r315, "R3.16": r316,
        "R3.17": r317, "R3.18": r318, "OLD2.18": old218, "OLD2.24": old224,
        "RELATE_I": relate1, "RELATE_II": relate2,
        "VISIT2.13": visit_z if ix.config.dimension is Dimension.Z else visit_y,
    }


class BlpModel:
    """A lazily generated y/z model; iterating yields its constraints."""

    def __init__(self, instance: Instance, config: ModelConfig):
        if config.dimension not in (Dimension.Y, Dimension.Z):
            raise ValueError("build_blp needs dimension Y or Z")
        self.instance = instance
        self.config = config
        self.families = blp_families(config)
        self.index = BlpIndex(instance.n, config)
        self.audit = CORRECTIONS + (RANGE_NOTE,)
        self._generators = _family_generators(self.index, config.total_flow_constant)

    @property
    def restricted(self) -> bool:
        return self.config.restrict_support is not None

    def family_stream(self, family: str, start: int = 1) -> Iterator[Constraint]:
        prefix = "R" + LABELS[family]
        n = start
        for terms, rhs in self._generators[family]():
            yield Constraint(tuple(terms), Relation.EQ, rhs, f"{prefix}_{n}")
            n += 1

    def constraints(self) -> Iterator[Constraint]:
        n = 1
        for family in self.families:
            for con in self.family_stream(family, n):
                yield con
                n += 1

    def partitions(self) -> list:
        """Independent per-family streams, labelled from ordinal 1; see
        :func:`flowcheck.core.relabel` for the global ordinals."""
        return [(fam, functools.partial(self.family_stream, fam)) for fam in self.families]

    __iter__ = constraints

    def family_counts(self) -> dict:
        return {fam: sum(1 for _ in self._generators[fam]()) for fam in self.families}

    def objective_terms(self) -> list:
        c = self.instance.c
        return [(c(i, j), (i, s, j) * 2) for i, s, j in
                sorted(self.index.arcs, key=lambda a: (a[0], a[1], a[2]))]

    def declared_variables(self) -> Iterator:
        """The restricted variable universe (every supported, admissible key).

        Empty for an unrestricted model, whose variables are the ones its
        constraints mention.
        """
        if not self.restricted:
            return iter(())
        keys = self.index.y_keys()
        if self.config.dimension is Dimension.Z:
            keys = itertools.chain(keys, self.index.z_keys())
        return keys


def build_blp(instance: Instance, config: ModelConfig) -> BlpModel:
    support = config.restrict_support
    if support is not None:
        bad = [a for a in support.arcs if not (1 <= a[0] <= instance.n and 1 <= a[2] <= instance.n
                                               and 1 <= a[1] <= instance.n)]
        if bad:
            raise ValueError(f"support arc {min(bad)} does not fit an instance with {instance.n} nodes")
    return BlpModel(instance, config)


def variables_of(model) -> list:
    """Distinct keys in a model (objective, constraints, declared bounds) or in
    a bare constraint stream, in canonical order."""
    keys = set()
    if isinstance(model, BlpModel):
        keys.update(key for _, key in model.objective_terms())
        keys.update(model.declared_variables())
        stream: Iterable = model.constraints()
    elif hasattr(model, "objective_terms") and hasattr(model, "constraints"):
        keys.update(key for _, key in model.objective_terms)
        stream = model.constraints
    else:
        stream = model
    for con in stream:
        keys.update(key for _, key in con.terms)
    return sorted(keys, key=key_order)


def lift_tour(tour, dimension: Dimension = Dimension.Z, total_flow: int = 1) -> Assignment:
    """Integral y (and z) point of a tour: products of its arc indicators."""
    n = len(tour)
    arcs = [(tour[s], s + 1, tour[(s + 1) % n]) for s in range(n)]
    values = {}
    for a in arcs:
        values[a + a] = total_flow
    for a, b in itertools.combinations(arcs, 2):
        values[a + b] = total_flow
    if dimension is Dimension.Z:
        for a, b, c in itertools.combinations(arcs, 3):
            values[a + b + c] = total_flow
    return Assignment(values, total_flow)
