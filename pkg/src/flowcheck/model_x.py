"""The one-dimensional flow model over x(i,s,j): arc i->j taken at step s."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import (Assignment, Constraint, Dimension, Instance, ModelConfig, Relation,
                   StartMode, sorted_keys)

X_FAMILIES = ("XSTART", "XFLOW", "XVISIT", "XSELF")


class NotIntegral(ValueError):
    """Raised when a point cannot be read as a single tour."""

    def __init__(self, fractional):
        self.fractional = frozenset(fractional)
        super().__init__(f"assignment is not integral ({len(self.fractional)} fractional keys)")


class StructuralError(ValueError):
    """An integral point that still does not trace one Hamiltonian cycle."""


@dataclass(frozen=True)
class XModel:
    config: ModelConfig
    instance: Instance
    constraints: tuple
    objective_terms: tuple

    def family_sizes(self) -> dict:
        sizes = dict.fromkeys(X_FAMILIES, 0)
        for con in self.constraints:
            sizes[con.label[1:].rsplit("_", 1)[0]] += 1
        return sizes

    def __iter__(self):
        return iter(self.constraints)

    def partitions(self) -> list:
        # labels here are already global, so one partition holds them all
        return [("X", lambda: iter(self.constraints))]


def build_x_model(instance: Instance, config: ModelConfig) -> XModel:
    if config.dimension is not Dimension.X:
        raise ValueError("build_x_model needs dimension X")
    n = instance.n
    nodes = range(1, n + 1)
    flow = config.total_flow_constant
    out = []

    def emit(family, terms, rhs):
        out.append(Constraint(tuple(terms), Relation.EQ, rhs, f"R{family}_{len(out) + 1}"))

    starts = [1] if config.start_mode is StartMode.FIXED else list(nodes)
    emit("XSTART", [(1, (i, 1, j)) for i in starts for j in nodes], flow)
    # stage s feeds stage s+1; stage n wraps back to stage 1 (the tour is a cycle)
    for s in range(1, n + 1):
        nxt = s % n + 1
        for j in nodes:
            terms = [(1, (i, s, j)) for i in nodes] + [(-1, (j, nxt, i)) for i in nodes]
            emit("XFLOW", terms, 0)
    for j in nodes:
        emit("XVISIT", [(1, (i, s, j)) for i in nodes for s in range(1, n + 1)], flow)
    for i in nodes:
        for s in range(1, n + 1):
            emit("XSELF", [(1, (i, s, i))], 0)

    objective_terms = tuple((instance.c(i, j), (i, s, j))
                            for i in nodes for s in range(1, n + 1) for j in nodes)
    return XModel(config, instance, tuple(out), objective_terms)


def tour_to_assignment(instance: Instance, tour, total_flow: int = 1) -> Assignment:
    tour = [int(t) for t in tour]
    n = instance.n
    if sorted(tour) != list(range(1, n + 1)):
        raise ValueError(f"tour must be a permutation of 1..{n}, got {tour}")
    values = {(tour[s], s + 1, tour[(s + 1) % n]): Fraction(total_flow) for s in range(n)}
    return Assignment(values, total_flow)


def assignment_to_tours(a: Assignment) -> list:
    """Decode an integral x point into its tour; raise NotIntegral otherwise."""
    if any(len(k) != 3 for k in a):
        raise ValueError("assignment_to_tours reads x keys only")
    flow = a.total_flow
    fractional = [k for k, v in a.items() if v != flow]
    if fractional or not a:
        raise NotIntegral(fractional)
    by_stage = {}
    for i, s, j in sorted_keys(a):
        by_stage.setdefault(s, []).append((i, j))
    n = len(by_stage)
    if sorted(by_stage) != list(range(1, n + 1)) or any(len(arcs) != 1 for arcs in by_stage.values()):
        raise StructuralError("an integral point must use exactly one arc per stage 1..n")
    tour = [by_stage[1][0][0]]
    for s in range(1, n + 1):
        i, j = by_stage[s][0]
        if i != tour[-1]:
            raise StructuralError(f"stage {s} leaves node {i} but the walk is at {tour[-1]}")
        tour.append(j)
    if tour[-1] != tour[0] or len(set(tour[:-1])) != n:
        raise StructuralError(f"walk {tour} is not a Hamiltonian cycle")
    return [tour[:-1]]
