"""Shared domain types: instances, variable keys, exact assignments, constraints.

Variable keys are plain tuples of 1-based integers.  The tuple length is the
tag: 3 for ``x(i,s,j)``, 6 for ``y(i,s,j,u,p,v)`` and 9 for
``z(i,s,j,u,p,v,k,r,t)``.  Every value is a :class:`fractions.Fraction`, so
feasibility checks never depend on a tolerance.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, NamedTuple, Optional, Union

Number = Union[int, Fraction]
VarKey = tuple  # tuple[int, ...] of length 3, 6 or 9

KIND_BY_LENGTH = {3: "x", 6: "y", 9: "z"}


class Dimension(enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"


class StartMode(enum.Enum):
    FIXED = "fixed"
    FREE = "free"


class Version(enum.Enum):
    OLD = "old"
    NEW = "new"


class Relation(enum.Enum):
    EQ = "="
    LE = "<="
    GE = ">="

    def holds(self, lhs, rhs) -> bool:
        if self is Relation.EQ:
            return lhs == rhs
        if self is Relation.LE:
            return lhs <= rhs
        return lhs >= rhs


class Ordering(enum.Enum):
    LEFT_GREATER = "left"
    RIGHT_GREATER = "right"
    EQUAL = "equal"


# ---------------------------------------------------------------------------
# variable keys


def key_kind(key: VarKey) -> str:
    try:
        return KIND_BY_LENGTH[len(key)]
    except KeyError:
        raise ValueError(f"not a variable key: {key!r}") from None


def key_order(key: VarKey) -> tuple:
    """Sort key giving the canonical total order (kind first, then indices)."""
    return (len(key), key)


def sorted_keys(keys: Iterable[VarKey]) -> list:
    return sorted(keys, key=key_order)


def is_diagonal(key: VarKey) -> bool:
    """True for ``y(i,s,j,i,s,j)``, the copy of ``x(i,s,j)`` inside the y-model."""
    return len(key) == 6 and key[:3] == key[3:]


def arcs_of(key: VarKey) -> tuple:
    """Split a key into its (i, s, j) arc triples."""
    return tuple(key[n:n + 3] for n in range(0, len(key), 3))


def format_rational(q: Number) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Instance:
    """A TSP instance with an exact integer cost matrix (self-arcs carry data too)."""

    cost: tuple
    name: str = ""

    def __post_init__(self):
        rows = tuple(tuple(int(c) for c in row) for row in self.cost)
        n = len(rows)
        if n < 3:
            raise ValueError(f"an instance needs at least 3 nodes, got {n}")
        if any(len(row) != n for row in rows):
            raise ValueError("cost matrix must be square")
        if any(c < 0 for row in rows for c in row):
            raise ValueError("costs must be non-negative")
        object.__setattr__(self, "cost", rows)

    @property
    def n(self) -> int:
        return len(self.cost)

    def c(self, i: int, j: int) -> int:
        """Arc cost i -> j, 1-based."""
        if not (1 <= i <= self.n and 1 <= j <= self.n):
            raise IndexError(f"arc ({i}, {j}) outside nodes 1..{self.n}")
        return self.cost[i - 1][j - 1]

    def tour_cost(self, tour) -> int:
        return sum(self.c(tour[k], tour[(k + 1) % len(tour)]) for k in range(len(tour)))


# ---------------------------------------------------------------------------
# assignments


class Assignment(Mapping):
    """Sparse exact point: key -> positive Fraction, absent keys are 0.

    ``total_flow`` is the value every stage sum must reach (1 for the
    normalized view, the scaling constant otherwise).
    """

    __slots__ = ("_values", "total_flow")

    def __init__(self, values: Union[Mapping, Iterable] = (), total_flow: Number = 1):
        items = values.items() if isinstance(values, Mapping) else values
        clean = {}
        for key, value in items:
            key = tuple(int(k) for k in key)
            key_kind(key)
            value = value if isinstance(value, Fraction) else Fraction(value)
            if value:
                clean[key] = value
        self._values = clean
        self.total_flow = Fraction(total_flow)
        if self.total_flow <= 0:
            raise ValueError("total_flow must be positive")

    @classmethod
    def _trusted(cls, values: dict, total_flow: Number) -> "Assignment":
        # constructors that already hold positive Fractions skip re-validation
        a = cls.__new__(cls)
        a._values = values
        a.total_flow = Fraction(total_flow)
        return a

    def __getitem__(self, key):
        return self._values[key]

    def __iter__(self) -> Iterator:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        return f"Assignment({len(self)} keys, total_flow={self.total_flow})"

    def __eq__(self, other):
        if not isinstance(other, Assignment):
            return NotImplemented
        return self.total_flow == other.total_flow and self._values == other._values

    __hash__ = None

    def value(self, key: VarKey) -> Fraction:
        return self._values.get(key, Fraction(0))

    def __add__(self, other: "Assignment") -> "Assignment":
        merged = dict(self._values)
        for key, value in other.items():
            merged[key] = merged.get(key, 0) + value
        return Assignment(merged, self.total_flow + other.total_flow)

    def scaled(self, t: Number) -> "Assignment":
        t = Fraction(t)
        if t <= 0:
            raise ValueError("scale factor must be positive")
        return Assignment._trusted({k: v * t for k, v in self._values.items()}, self.total_flow * t)

    def normalized(self) -> "Assignment":
        """The same point rescaled so that total_flow == 1."""
        return self.scaled(1 / self.total_flow)

    def with_value(self, key: VarKey, value: Number) -> "Assignment":
        values = dict(self._values)
        values[tuple(key)] = value
        return Assignment(values, self.total_flow)

    def without(self, key: VarKey) -> "Assignment":
        values = dict(self._values)
        values.pop(tuple(key), None)
        return Assignment._trusted(values, self.total_flow)

    def of_kind(self, kind: str) -> "Assignment":
        size = {v: k for k, v in KIND_BY_LENGTH.items()}[kind]
        return Assignment._trusted({k: v for k, v in self._values.items() if len(k) == size}, self.total_flow)

    def x_view(self) -> "Assignment":
        """x values, read from the y diagonal when the point lives in the y/z model."""
        if any(len(k) == 3 for k in self._values):
            return self.of_kind("x")
        return Assignment._trusted(
            {k[:3]: v for k, v in self._values.items() if is_diagonal(k)}, self.total_flow)


# ---------------------------------------------------------------------------
# constraints and configuration


class Constraint(NamedTuple):
    terms: tuple  # ((coefficient, key), ...)
    relation: Relation
    rhs: Number
    label: str

    def keys(self):
        return [key for _, key in self.terms]


@dataclass(frozen=True)
class ModelConfig:
    """What to generate.

    ``include_visit_constraints`` and ``include_relate`` default to the
    version (on for OLD, off for NEW); ``include_first_step_reach`` (the old
    2.24 family) is always opt-in.  ``restrict_support`` is a
    :class:`flowcheck.model_blp.Support` limiting the variable universe.
    """

    dimension: Dimension = Dimension.X
    start_mode: StartMode = StartMode.FREE
    version: Version = Version.NEW
    include_visit_constraints: Optional[bool] = None
    include_relate: Optional[bool] = None
    include_first_step_reach: bool = False
    include_old_conservation: Optional[bool] = None
    total_flow_constant: int = 1
    restrict_support: Any = field(default=None, compare=False)

    def __post_init__(self):
        for name, enum_type in (("dimension", Dimension), ("start_mode", StartMode), ("version", Version)):
            value = getattr(self, name)
            if not isinstance(value, enum_type):
                object.__setattr__(self, name, enum_type(value))
        if int(self.total_flow_constant) != self.total_flow_constant or self.total_flow_constant < 1:
            raise ValueError("total_flow_constant must be a positive integer")
        object.__setattr__(self, "total_flow_constant", int(self.total_flow_constant))

    def _default_old(self, flag):
        return self.version is Version.OLD if flag is None else flag

    @property
    def visit_constraints(self) -> bool:
        return self._default_old(self.include_visit_constraints)

    @property
    def relate(self) -> bool:
        return self._default_old(self.include_relate)

    @property
    def old_conservation(self) -> bool:
        return self._default_old(self.include_old_conservation)

    def snapshot(self) -> dict:
        return {
            "dimension": self.dimension.value,
            "start_mode": self.start_mode.value,
            "version": self.version.value,
            "visit_constraints": self.visit_constraints,
            "relate": self.relate,
            "first_step_reach": self.include_first_step_reach,
            "old_conservation": self.old_conservation,
            "total_flow_constant": self.total_flow_constant,
            "restricted": self.restrict_support is not None,
        }


# ---------------------------------------------------------------------------
# operations


def objective(instance: Instance, a: Assignment) -> Fraction:
    """Exact tour cost of a point: sum of c(i, j) over x keys, or over the y
    diagonal when the point carries y/z keys."""
    use_diagonal = any(len(k) != 3 for k in a)
    total = Fraction(0)
    for key, value in a.items():
        if use_diagonal:
            if not is_diagonal(key):
                continue
        elif len(key) != 3:
            continue
        i, _, j = key[:3]
        if not (1 <= i <= instance.n and 1 <= j <= instance.n):
            raise IndexError(f"key {key} indexes a node outside 1..{instance.n}")
        total += instance.cost[i - 1][j - 1] * value
    return total


def _log2_bounds(value: int, precision: int):
    """Rational bounds lo <= log2(value) <= hi, from bit lengths of a power."""
    bits = (value ** precision).bit_length()
    return Fraction(bits - 1, precision), Fraction(bits, precision)


def expressiveness_gap(n: int, c: int, k: int) -> Ordering:
    """Compare n! (bits needed to name a subset of tours) with
    n**(3k) * c * log2(n!) (bits a k-dimensional model can hold).

    Decided exactly: log2(n!) is bracketed by bit lengths of powers of n!,
    refined until the bracket excludes the crossover.
    """
    if n < 3 or c < 1 or k < 1:
        raise ValueError("need n >= 3, c >= 1, k >= 1")
    fact = 1
    for m in range(2, n + 1):
        fact *= m
    weight = n ** (3 * k) * c
    if fact & (fact - 1) == 0:  # power of two: log2 is an exact integer
        right = weight * (fact.bit_length() - 1)
        return Ordering.EQUAL if fact == right else (
            Ordering.LEFT_GREATER if fact > right else Ordering.RIGHT_GREATER)
    precision = 1
    while True:
        lo, hi = _log2_bounds(fact, precision)
        if fact > weight * hi:
            return Ordering.LEFT_GREATER
        if fact < weight * lo:
            return Ordering.RIGHT_GREATER
        precision *= 2


# ---------------------------------------------------------------------------
# ordered parallel evaluation


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit value, else FLOWCHECK_THREADS, else 1."""
    if threads is None:
        threads = int(os.environ.get("FLOWCHECK_THREADS", "1") or 1)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return threads


def partitions_of(model) -> list:
    if hasattr(model, "partitions"):
        return model.partitions()
    return [("", lambda: iter(model))]


def relabel(label: str, offset: int) -> str:
    if not offset:
        return label
    prefix, _, ordinal = label.rpartition("_")
    if not ordinal.isdigit():
        return label
    return f"{prefix}_{int(ordinal) + offset}"


def ordered_map(func, items: list, threads: int = 1) -> Iterator:
    """map(func, items) in input order, evaluated by up to ``threads``
    workers; at most ``threads`` results are held at once."""
    if threads <= 1 or len(items) <= 1:
        yield from map(func, items)
        return
    with ThreadPoolExecutor(threads) as pool:
        for start in range(0, len(items), threads):
            yield from pool.map(func, items[start:start + threads])
