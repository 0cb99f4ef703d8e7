"""Planted unique instances and exhaustive solution counting."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .formula import Assignment, Formula, bit, popcount, values_of

BRUTE_FORCE_CAP = 10**8
BLOCKER_MODES = ("distinct", "random", "coincident")


class CapExceeded(ValueError):
    pass


def iter_solutions(f: Formula) -> Iterator[Assignment]:
    """All satisfying assignments, by backtracking with forward checking."""
    if f.trivially_unsat:
        return
    adj = f.adjacency
    yield from _backtrack(dict(f.domains), {}, adj)


def _backtrack(doms, assigned, adj):
    if not doms:
        yield dict(assigned)
        return
    x = min(doms, key=lambda v: (popcount(doms[v]), v))
    rest = {v: m for v, m in doms.items() if v != x}
    for c in values_of(doms[x]):
        narrowed = dict(rest)
        ok = True
        for y, d in adj[x].get(c, ()):
            if y in narrowed:
                narrowed[y] &= ~bit(d)
                if not narrowed[y]:
                    ok = False
                    break
            elif assigned.get(y) == d:
                ok = False
                break
        if not ok:
            continue
        assigned[x] = c
        yield from _backtrack(narrowed, assigned, adj)
        del assigned[x]


def count_solutions(f: Formula, limit: Optional[int] = None) -> int:
    """Exact number of solutions (stopping early once ``limit`` is reached)."""
    count = 0
    for _ in iter_solutions(f):
        count += 1
        if limit is not None and count >= limit:
            break
    return count


_ROW_LIMIT = 1 << 20


def _levels(f: Formula, cap: int):
    """Per variable: its values and the nogoods reaching back to earlier variables."""
    xs = list(f.domains)
    space = math.prod(popcount(m) for m in f.domains.values())
    if space > cap:
        raise CapExceeded(f"search space {space} exceeds cap {cap}")
    pos = {x: j for j, x in enumerate(xs)}
    back: List[List[Tuple[int, int, int]]] = [[] for _ in xs]
    for x, c, y, d in f.nogoods:
        i, j = sorted((pos[x], pos[y]))
        ci, cj = (c, d) if pos[x] == i else (d, c)
        back[j].append((i, ci, cj))
    doms = [np.array(values_of(f.domains[x]), dtype=np.int8) for x in xs]
    return xs, doms, back


def _product(doms, back, rows: "np.ndarray", j: int) -> Iterator["np.ndarray"]:
    """Lexicographic product of the domains, pruned level by level; yields full rows."""
    if j == len(doms):
        yield rows
        return
    dom = doms[j]
    ext = np.empty((len(rows) * len(dom), j + 1), dtype=np.int8)
    ext[:, :j] = np.repeat(rows, len(dom), axis=0)
    ext[:, j] = np.tile(dom, len(rows))
    ok = np.ones(len(ext), dtype=bool)
    for i, ci, cj in back[j]:
        ok &= ~((ext[:, i] == ci) & (ext[:, j] == cj))
    ext = ext[ok]
    for start in range(0, len(ext), _ROW_LIMIT):
        yield from _product(doms, back, ext[start : start + _ROW_LIMIT], j + 1)


def _rows(f: Formula, cap: int) -> Iterator[Tuple[List[int], "np.ndarray"]]:
    xs, doms, back = _levels(f, cap)
    for block in _product(doms, back, np.zeros((1, 0), dtype=np.int8), 0):
        yield xs, block


def brute_force_solutions(f: Formula, cap: int = BRUTE_FORCE_CAP) -> Iterator[Assignment]:
    """Every solution in lexicographic order, by exhaustive vectorized enumeration.

    Shares nothing with the backtracking counter; rows are filtered one
    variable at a time so dead prefixes are not expanded.
    """
    if f.trivially_unsat:
        return
    for xs, block in _rows(f, cap):
        for row in block:
            yield dict(zip(xs, map(int, row)))


def brute_force_count(f: Formula, cap: int = BRUTE_FORCE_CAP) -> int:
    if f.trivially_unsat:
        return 0
    return sum(len(block) for _, block in _rows(f, cap))


def brute_force_solve(f: Formula, cap: int = BRUTE_FORCE_CAP) -> Optional[Assignment]:
    return next(brute_force_solutions(f, cap), None)


@dataclass
class PlantedInstance:
    formula: Formula
    planted: Assignment
    solution_count: Optional[int]
    # (x, wrong value) -> blocker variable planted for it
    blockers: Dict[Tuple[int, int], int] = field(default_factory=dict)


def _pick_blockers(x: int, wrong: List[int], n: int, mode: str, rng: random.Random) -> Dict[int, int]:
    others = [y for y in range(1, n + 1) if y != x]
    if mode == "distinct":
        if len(others) < len(wrong):
            raise ValueError(f"distinct blockers need n >= k, got n={n}")
        ys = rng.sample(others, len(wrong))
    elif mode == "coincident":
        ys = [rng.choice(others)] * len(wrong)
    elif mode == "random":
        ys = [rng.choice(others) for _ in wrong]
    else:
        raise ValueError(f"unknown blocker mode {mode!r}")
    return dict(zip(wrong, ys))


def generate_unique(
    n: int,
    k: int,
    blocker_mode: str = "distinct",
    rng: Optional[random.Random] = None,
    verify: bool = True,
    max_rounds: int = 100_000,
) -> PlantedInstance:
    """Plant a random assignment, add one blocker nogood per (variable, wrong value),
    then kill every other solution with random nogoods the planted one survives.

    With ``verify=False`` only the blocker structure is planted and
    uniqueness is not established (for large structural experiments).
    """
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    rng = rng if rng is not None else random.Random()
    planted = {x: rng.randint(1, k) for x in range(1, n + 1)}
    nogoods = []
    unary = []
    blockers: Dict[Tuple[int, int], int] = {}
    for x in range(1, n + 1):
        wrong = [c for c in range(1, k + 1) if c != planted[x]]
        if n == 1:
            unary += [(x, c) for c in wrong]
            continue
        for c, y in _pick_blockers(x, wrong, n, blocker_mode, rng).items():
            blockers[(x, c)] = y
            nogoods.append((x, c, y, planted[y]))
    f = Formula.build(n, k, nogoods, unary)
    if not verify:
        return PlantedInstance(f, planted, None, blockers)
    extra = set(f.nogoods)
    for _ in range(max_rounds):
        other = next((s for s in iter_solutions(f) if s != planted), None)
        if other is None:
            break
        diff = [x for x in range(1, n + 1) if other[x] != planted[x]]
        u = rng.choice(diff)
        v = rng.choice([y for y in range(1, n + 1) if y != u])
        extra.add((u, other[u], v, other[v]))
        f = Formula.build(n, k, extra, unary)
    else:
        raise RuntimeError("uniqueness not reached within the round budget")
    count = count_solutions(f, limit=2)
    if count != 1 or not f.satisfied_by(planted):
        raise RuntimeError("generated instance is not uniquely satisfied by the plant")
    return PlantedInstance(f, planted, count, blockers)
