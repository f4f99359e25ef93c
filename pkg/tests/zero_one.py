"""Exhaustive {0,1} enumeration of equality systems, for the tests.

Depth-first over the variables in a fixed order.  After each assignment,
every equality touching the variable is checked against the range its
unassigned terms can still reach; a branch is cut as soon as one equality
is out of range.  Knows nothing about tours.
"""

from collections import defaultdict


def zero_one_solutions(constraints, variables):
    """Yield every 0/1 vector (as the set of keys set to 1) satisfying all
    equalities.  ``variables`` fixes the branching order."""
    rows = []
    touching = defaultdict(list)
    for con in constraints:
        coefs = {}
        for coef, key in con.terms:
            coefs[key] = coefs.get(key, 0) + coef
        r = len(rows)
        rows.append((coefs, con.rhs))
        for key in coefs:
            touching[key].append(r)
    position = {key: n for n, key in enumerate(variables)}
    for coefs, _ in rows:
        for key in coefs:
            if key not in position:
                raise ValueError(f"constraint mentions {key}, which is not a branching variable")
    partial = [0] * len(rows)
    # reachable range of the still-unassigned part of each row
    room_lo = [sum(c for c in coefs.values() if c < 0) for coefs, _ in rows]
    room_hi = [sum(c for c in coefs.values() if c > 0) for coefs, _ in rows]
    chosen = []

    def consistent(r):
        rhs = rows[r][1]
        return partial[r] + room_lo[r] <= rhs <= partial[r] + room_hi[r]

    def dive(n):
        if n == len(variables):
            yield frozenset(chosen)
            return
        key = variables[n]
        for value in (0, 1):
            for r in touching[key]:
                c = rows[r][0][key]
                if c < 0:
                    room_lo[r] -= c
                else:
                    room_hi[r] -= c
                partial[r] += c * value
            if value:
                chosen.append(key)
            if all(consistent(r) for r in touching[key]):
                yield from dive(n + 1)
            if value:
                chosen.pop()
            for r in touching[key]:
                c = rows[r][0][key]
                if c < 0:
                    room_lo[r] += c
                else:
                    room_hi[r] += c
                partial[r] -= c * value

    yield from dive(0)
