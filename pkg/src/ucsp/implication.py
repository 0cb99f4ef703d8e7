"""D-implication and eligible values.

``a`` D-implies ``x != c`` when some set G of at most D nogoods, together
with ``a``, leaves no way to set ``x = c``.  Domains count as part of the
variables, not as constraints, so they are always in force.

Equivalently: ``a + {x: c}`` is refuted by at most D nogoods.  A minimal
refuting set is connected through unassigned variables, so it either
mentions ``x`` or already refutes ``a`` alone.  We enumerate connected
nogood sets grown from the nogoods on ``x`` and decide each by brute force
over the (at most 2D) unassigned variables they touch.
"""

from __future__ import annotations

import itertools
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set

from .formula import Formula, Nogood, bit, values_of

MAX_DEPTH = 3


class EmptyEligibleSet(Exception):
    def __init__(self, x: int) -> None:
        super().__init__(f"no eligible value left for variable {x}")
        self.x = x


def _active(g: Nogood, a: Mapping[int, int], doms: Mapping[int, int]) -> bool:
    """Whether a nogood can still fire under ``a`` (not already satisfied)."""
    x, c, y, d = g
    ax, ay = a.get(x), a.get(y)
    if ax is not None and ax != c:
        return False
    if ay is not None and ay != d:
        return False
    if ax is None and not doms[x] & bit(c):
        return False
    if ay is None and not doms[y] & bit(d):
        return False
    return True


def _free_vars(g: Nogood, a: Mapping[int, int]) -> List[int]:
    return [v for v in (g[0], g[2]) if v not in a]


def _refuted(group: Iterable[Nogood], a: Mapping[int, int], doms: Mapping[int, int]) -> bool:
    """True iff no assignment to the group's free variables avoids every nogood."""
    group = list(group)
    free = sorted({v for g in group for v in _free_vars(g, a)})
    choices = [values_of(doms[v]) for v in free]
    for combo in itertools.product(*choices):
        val = dict(zip(free, combo))
        val.update((v, a[v]) for g in group for v in (g[0], g[2]) if v in a)
        if not any(val[x] == c and val[y] == d for x, c, y, d in group):
            return False
    return True


def _refutable_from(
    f: Formula,
    a: Mapping[int, int],
    seeds: Iterable[Nogood],
    D: int,
) -> bool:
    """Is there a connected set of <= D active nogoods, containing a seed, that refutes ``a``?"""
    doms = f.domains
    inc = f.incident
    seeds = [g for g in seeds if _active(g, a, doms)]
    seen: Set[FrozenSet[Nogood]] = set()
    frontier = [frozenset([g]) for g in seeds]
    for size in range(1, D + 1):
        grown = []
        for group in frontier:
            if group in seen:
                continue
            seen.add(group)
            if _refuted(group, a, doms):
                return True
            if size == D:
                continue
            touch = {v for g in group for v in _free_vars(g, a)}
            for v in touch:
                for h in inc[v]:
                    if h not in group and _active(h, a, doms):
                        grown.append(group | {h})
        frontier = grown
    return False


def is_refutable(f: Formula, a: Mapping[int, int], D: int) -> bool:
    """Whether at most D nogoods (plus domains) already contradict ``a``."""
    if D < 0:
        raise ValueError("D must be non-negative")
    if any(m == 0 for v, m in f.domains.items() if v not in a):
        return True
    if D == 0:
        return False
    return _refutable_from(f, a, f.nogoods, D)


def empty_refutable(f: Formula, D: int) -> bool:
    """``is_refutable(f, {}, D)``, memoized on the (immutable) formula."""
    memo = f.__dict__.setdefault("_empty_refutable", {})
    if D not in memo:
        memo[D] = is_refutable(f, {}, D)
    return memo[D]


def _implies_via_x(f: Formula, a: Mapping[int, int], x: int, c: int, D: int) -> bool:
    if not f.domains[x] & bit(c):
        return True
    if D == 0:
        return False
    doms = f.domains
    if D == 1:
        for y, d in f.adjacency[x].get(c, ()):
            ay = a.get(y)
            if ay == d or (ay is None and doms[y] == bit(d)):
                return True
        return False
    b = dict(a)
    b[x] = c
    return _refutable_from(f, b, f.incident[x], D)


def d_implies(f: Formula, a: Mapping[int, int], x: int, c: int, D: int = 1) -> bool:
    """Whether ``a`` D-implies ``x != c``."""
    if x in a:
        raise ValueError(f"variable {x} is already assigned")
    if D < 0 or D > MAX_DEPTH:
        raise ValueError(f"D must lie in 0..{MAX_DEPTH}")
    return _implies_via_x(f, a, x, c, D) or is_refutable(f, a, D)


def eligible_mask(
    f: Formula, a: Mapping[int, int], x: int, D: int = 1, consistent: bool = False
) -> int:
    """Bit mask of eligible values of ``x``.

    ``consistent=True`` promises that ``a`` is not D-refutable on its own,
    which skips the global check.  PPSZ runs keep that promise: they only
    ever extend an unrefuted assignment by an eligible value.
    """
    if x in a:
        raise ValueError(f"variable {x} is already assigned")
    if not consistent and is_refutable(f, a, D):
        return 0
    mask = 0
    for c in values_of(f.domains[x]):
        if not _implies_via_x(f, a, x, c, D):
            mask |= bit(c)
    return mask


def eligible_values(f: Formula, a: Mapping[int, int], x: int, D: int = 1) -> List[int]:
    """Values of ``x`` not ruled out by D-implication from ``a``.

    Raises :class:`EmptyEligibleSet` when nothing survives.
    """
    if D < 0 or D > MAX_DEPTH:
        raise ValueError(f"D must lie in 0..{MAX_DEPTH}")
    out = values_of(eligible_mask(f, a, x, D))
    if not out:
        raise EmptyEligibleSet(x)
    return out


def semantic_implies(
    f: Formula, a: Mapping[int, int], x: int, c: int, D: int
) -> bool:
    """Reference check straight from the definition: try every G with |G| <= D.

    Exponential in everything; for tests on tiny formulas only.
    """
    free = [v for v in f.domains if v not in a and v != x]
    if not f.domains[x] & bit(c):
        return True
    goods = sorted(f.nogoods)
    for size in range(0, D + 1):
        for G in itertools.combinations(goods, size):
            if not any(_extends(f, a, free, x, c, G)):
                return True
    return False


def _extends(f, a, free, x, c, G):
    for combo in itertools.product(*(values_of(f.domains[v]) for v in free)):
        val: Dict[int, int] = dict(a)
        val.update(zip(free, combo))
        val[x] = c
        if not any(val[u] == cu and val[v] == cv for u, cu, v, cv in G):
            yield True
