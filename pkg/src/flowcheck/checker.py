"""Exact feasibility checking of constraint streams against assignments."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import (Assignment, Constraint, Instance, Relation, format_rational, objective, ordered_map,
                   partitions_of, relabel, resolve_threads)


class Mode(enum.Enum):
    FAIL_FAST = "fail_fast"
    COLLECT = "collect"


class MalformedConstraint(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    label: str
    lhs: Fraction
    relation: Relation
    rhs: Fraction

    @property
    def residual(self) -> Fraction:
        return self.lhs - self.rhs

    def line(self) -> str:
        return f"{self.label}\t{format_rational(self.lhs)}\t{self.relation.value}\t{format_rational(self.rhs)}"


@dataclass
class CheckReport:
    total: int = 0
    satisfied: int = 0
    violation_count: int = 0
    violations: list = field(default_factory=list)
    objective: Optional[Fraction] = None
    bound_violations: int = 0
    stopped_early: bool = False

    @property
    def feasible(self) -> bool:
        return self.violation_count == 0 and self.bound_violations == 0 and not self.stopped_early

    @property
    def worst_residual(self) -> Fraction:
        return max((abs(v.residual) for v in self.violations), default=Fraction(0))

    def lines(self) -> list:
        return [v.line() for v in self.violations]

    def summary(self) -> str:
        text = (f"constraints {self.total}  satisfied {self.satisfied}  "
                f"violated {self.violation_count}  bound violations {self.bound_violations}")
        if self.objective is not None:
            text += f"  objective {format_rational(self.objective)}"
        return text


class _ScaledValues:
    """Assignment values as integers over one common denominator, so each
    constraint sums integers; the comparison stays exact."""

    def __init__(self, a: Assignment):
        denom = 1
        for v in a.values():
            d = v.denominator
            if denom % d:
                denom = denom * d // math.gcd(denom, d)
        self.denominator = denom
        self.values = {k: v.numerator * (denom // v.denominator) for k, v in a.items()}


def evaluate(con: Constraint, scaled: _ScaledValues):
    """(lhs, holds) for one constraint; lhs is an exact Fraction."""
    if not con.terms:
        raise MalformedConstraint(f"constraint {con.label} has no terms")
    get = scaled.values.get
    total = 0
    for coef, key in con.terms:
        v = get(key)
        if v:
            total += coef * v
    rhs = Fraction(con.rhs)
    d = scaled.denominator
    scaled_rhs = rhs * d
    if scaled_rhs.denominator == 1:
        holds = con.relation.holds(total, scaled_rhs.numerator)
    else:
        holds = con.relation.holds(Fraction(total), scaled_rhs)
    return Fraction(total, d), holds


def _check_stream(stream, scaled, fail_fast: bool, cap: int) -> CheckReport:
    report = CheckReport()
    for con in stream:
        lhs, holds = evaluate(con, scaled)
        report.total += 1
        if holds:
            report.satisfied += 1
            continue
        report.violation_count += 1
        if len(report.violations) < cap:
            report.violations.append(Violation(con.label, lhs, con.relation, Fraction(con.rhs)))
        if fail_fast:
            report.stopped_early = True
            break
    return report


def check(constraints, a: Assignment, mode: Mode = Mode.COLLECT, cap: int = 1000,
          instance: Optional[Instance] = None, threads: Optional[int] = None) -> CheckReport:
    """Evaluate every constraint exactly.  FAIL_FAST stops at the first
    violation; COLLECT keeps at most ``cap`` violations but counts them all.

    ``constraints`` is a model (checked family by family, possibly in
    parallel) or any iterable of constraints.  The report does not depend
    on the thread count.
    """
    fail_fast = Mode(mode) is Mode.FAIL_FAST
    threads = resolve_threads(threads)
    scaled = _ScaledValues(a)
    parts = partitions_of(constraints)

    def run(part):
        return _check_stream(part[1](), scaled, fail_fast, cap)

    report = CheckReport()
    for sub in ordered_map(run, parts, threads):
        offset = report.total
        report.total += sub.total
        report.satisfied += sub.satisfied
        report.violation_count += sub.violation_count
        room = cap - len(report.violations)
        report.violations += [Violation(relabel(v.label, offset), v.lhs, v.relation, v.rhs)
                              for v in sub.violations[:max(room, 0)]]
        if sub.stopped_early:
            report.stopped_early = True
            break
    report.bound_violations = check_bounds(a, a.total_flow)
    if instance is not None:
        report.objective = objective(instance, a)
    return report


def check_bounds(a: Assignment, total_flow) -> int:
    """Keys whose value lies outside [0, total_flow]."""
    return sum(1 for v in a.values() if v < 0 or v > total_flow)


def gap_report(instance: Instance, a: Assignment, oracle_cost) -> Fraction:
    """objective(a) - total_flow * oracle_cost; negative means the point is
    cheaper than every tour."""
    return objective(instance, a) - a.total_flow * Fraction(oracle_cost)
