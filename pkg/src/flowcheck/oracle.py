"""Exact TSP oracles: enumeration for small instances, branch and bound otherwise.

Tours are directed sequences starting at node 1.  Counting conventions:
``fixed_start`` counts each directed cycle once, ``all_rotations`` counts
every one of its n rotations (n times as many).
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Optional

from .core import Instance

BRUTE_FORCE_LIMIT = 12
CONVENTIONS = ("fixed_start", "all_rotations")


@dataclass(frozen=True)
class OracleResult:
    optimal_cost: int
    tour: tuple
    optimal_count: Optional[int]
    nodes_explored: int
    convention: str = "fixed_start"


def _multiplier(instance: Instance, convention: str) -> int:
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown counting convention {convention!r}; choose from {CONVENTIONS}")
    return instance.n if convention == "all_rotations" else 1


def _guard(instance: Instance):
    if instance.n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force refuses n={instance.n} > {BRUTE_FORCE_LIMIT}; "
                         "use branch_and_bound")


def tours(instance: Instance):
    """Every directed tour from node 1 with its cost, in lexicographic order."""
    _guard(instance)
    cost = instance.cost
    for rest in itertools.permutations(range(2, instance.n + 1)):
        tour = (1,) + rest
        total = cost[tour[-1] - 1][0]
        for a, b in zip(tour, rest):
            total += cost[a - 1][b - 1]
        yield tour, total


def brute_force(instance: Instance, convention: str = "fixed_start") -> OracleResult:
    mult = _multiplier(instance, convention)
    best, best_tour, count, explored = None, None, 0, 0
    for tour, total in tours(instance):
        explored += 1
        if best is None or total < best:
            best, best_tour, count = total, tour, 1
        elif total == best:
            count += 1
    return OracleResult(best, best_tour, count * mult, explored, convention)


def tours_with_cost(instance: Instance, cost: int) -> list:
    return [tour for tour, total in tours(instance) if total == cost]


def count_optimal(instance: Instance, cost: int, convention: str = "fixed_start") -> int:
    """Number of tours of exactly ``cost``."""
    mult = _multiplier(instance, convention)
    return mult * sum(1 for _, total in tours(instance) if total == cost)


def cost_histogram(instance: Instance, convention: str = "fixed_start") -> dict:
    mult = _multiplier(instance, convention)
    hist = Counter(total for _, total in tours(instance))
    return {c: hist[c] * mult for c in sorted(hist)}


# ---------------------------------------------------------------------------
# branch and bound


def _mst(nodes: list, sym) -> int:
    """Prim on the symmetric min-cost graph; sym[a][b] = min(c(a,b), c(b,a))."""
    if len(nodes) < 2:
        return 0
    first = nodes[0]
    dist = {v: sym[first][v] for v in nodes[1:]}
    total = 0
    while dist:
        v = min(dist, key=dist.__getitem__)
        total += dist.pop(v)
        row = sym[v]
        for w in dist:
            if row[w] < dist[w]:
                dist[w] = row[w]
    return total


def branch_and_bound(instance: Instance, count: bool = False,
                     memo_cap: int = 2_000_000) -> OracleResult:
    """Depth-first search from node 1, cheapest child first.

    The bound for the children of a node is the larger of the row-minimum
    sum and an MST over the unvisited nodes plus the cheapest way home.
    Without counting, a (visited set, current node) pair reached at no
    better cost is pruned.  With ``count=True`` ties are explored too and
    ``optimal_count`` holds the number of optimal tours (fixed start).
    """
    n = instance.n
    c = [[0] + list(row) for row in instance.cost]
    c.insert(0, [0] * (n + 1))
    sym = [[min(c[a][b], c[b][a]) for b in range(n + 1)] for a in range(n + 1)]
    home = 1
    best = [None]
    best_tour = [None]
    found = [0]
    explored = [0]
    seen = {}

    def prune(bound):
        if best[0] is None:
            return False
        return bound > best[0] if count else bound >= best[0]

    def dive(path, mask, partial):
        explored[0] += 1
        cur = path[-1]
        rest = [v for v in range(2, n + 1) if not mask >> v & 1]
        if not rest:
            total = partial + c[cur][home]
            if best[0] is None or total < best[0]:
                best[0], best_tour[0], found[0] = total, tuple(path), 1
            elif total == best[0]:
                found[0] += 1
            return
        if not count:
            key = (mask, cur)
            old = seen.get(key)
            if old is not None and old <= partial:
                return
            if old is not None or len(seen) < memo_cap:
                seen[key] = partial
        # bounds shared by every child
        targets = rest + [home]
        row_sum = sum(min(c[w][u] for u in targets if u != w) for w in rest)
        tree = _mst(rest, sym)
        back = sorted((c[w][home], w) for w in rest)
        children = sorted(rest, key=lambda v: (c[cur][v], v))
        for v in children:
            if len(rest) == 1:
                bound = partial + c[cur][v] + c[v][home]
            else:
                ret = back[0][0] if back[0][1] != v else back[1][0]
                bound = partial + c[cur][v] + max(tree + ret, row_sum)
            if prune(bound):
                continue
            path.append(v)
            dive(path, mask | 1 << v, partial + c[cur][v])
            path.pop()

    import sys
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * n + 100))
    try:
        dive([home], 1 << home, 0)
    finally:
        sys.setrecursionlimit(limit)
    return OracleResult(best[0], best_tour[0], found[0] if count else None, explored[0])
