"""The PPSZ iteration: settle variables in random time order, each value
drawn uniformly from its eligible set.  Also the truncated run used by the
hybrid solver, which stops after a prefix and reports eligible-set sizes.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .formula import Assignment, Formula, popcount, values_of
from .implication import MAX_DEPTH, eligible_mask, empty_refutable
from .work import SolveResult, Status, Work


@dataclass(frozen=True)
class TimeDraw:
    """Per-variable times in [0, 1]; the induced order sorts by (time, index)."""

    times: Dict[int, float]

    @property
    def order(self) -> List[int]:
        return sorted(self.times, key=lambda x: (self.times[x], x))


def draw_times(n: int, rng: random.Random, variables: Optional[Sequence[int]] = None) -> TimeDraw:
    if variables is None:
        variables = range(1, n + 1)
    elif len(variables) != n:
        raise ValueError("variables must list exactly n entries")
    return TimeDraw({x: rng.random() for x in variables})


@dataclass
class IterationTrace:
    r_counts: Counter = field(default_factory=Counter)
    b_counts: Counter = field(default_factory=Counter)
    prefix_assignment: Assignment = field(default_factory=dict)
    # eligible masks of the variables left for the second phase
    eligible: Dict[int, int] = field(default_factory=dict)
    order: List[int] = field(default_factory=list)
    aborted: bool = False

    @property
    def total(self) -> int:
        return sum(self.r_counts.values()) + sum(self.b_counts.values())


def prefix_size(t: float, n: int) -> int:
    """Number of variables settled before the cutoff: ceil(t * n)."""
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"cutoff t must lie in [0, 1], got {t}")
    # guard against 0.23 * 100 == 23.000000000000004
    return min(n, max(0, math.ceil(t * n - 1e-9)))


def _check_depth(D: int) -> None:
    if not 0 <= D <= MAX_DEPTH:
        raise ValueError(f"D must lie in 0..{MAX_DEPTH}")


def ppsz_truncated(
    f: Formula,
    t: float,
    D: int = 1,
    rng: Optional[random.Random] = None,
    times: Optional[TimeDraw] = None,
    planted: Optional[Mapping[int, int]] = None,
    work: Optional[Work] = None,
) -> IterationTrace:
    """Settle the first ceil(t*n) variables PPSZ-style, then measure the rest.

    With ``planted`` given, every settled variable takes its planted value
    instead of a random draw (the run conditioned on correct guesses).  The
    recorded sizes are those of the eligible sets the variables had.
    """
    _check_depth(D)
    rng = rng if rng is not None else random.Random()
    work = work if work is not None else Work()
    if times is None:
        times = draw_times(len(f.domains), rng, f.variables)
    order = times.order
    trace = IterationTrace(order=order)
    if empty_refutable(f, D):
        trace.aborted = True
        return trace
    m = prefix_size(t, len(order))
    a = trace.prefix_assignment
    for x in order[:m]:
        mask = eligible_mask(f, a, x, D, consistent=True)
        size = popcount(mask)
        if size == 0:
            trace.aborted = True
            return trace
        if planted is not None:
            c = planted[x]
            if not mask & (1 << (c - 1)):
                raise ValueError(f"planted value of variable {x} was ruled out")
        else:
            c = rng.choice(values_of(mask))
        a[x] = c
        trace.r_counts[size] += 1
        work.settlements += 1
    for x in order[m:]:
        mask = eligible_mask(f, a, x, D, consistent=True)
        trace.eligible[x] = mask
        trace.b_counts[popcount(mask)] += 1
    if trace.b_counts[0]:
        trace.aborted = True
    else:
        del trace.b_counts[0]
    return trace


def ppsz_iteration(
    f: Formula,
    D: int = 1,
    rng: Optional[random.Random] = None,
    times: Optional[TimeDraw] = None,
    work: Optional[Work] = None,
) -> Tuple[Assignment, bool]:
    """One full PPSZ pass.  Returns the assignment built and whether it satisfies ``f``.

    An empty eligible set aborts the pass; the partial assignment is returned
    with ``False``.
    """
    trace = ppsz_truncated(f, 1.0, D, rng, times=times, work=work)
    a = trace.prefix_assignment
    if trace.aborted:
        return a, False
    return a, f.satisfied_by(a)


def solve_ppsz(
    f: Formula,
    D: int = 1,
    rng: Optional[random.Random] = None,
    budget: int = 1000,
    work: Optional[Work] = None,
) -> SolveResult:
    """Repeat PPSZ passes until one satisfies ``f`` or ``budget`` passes are spent."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    rng = rng if rng is not None else random.Random()
    work = work if work is not None else Work()
    for i in range(1, budget + 1):
        a, ok = ppsz_iteration(f, D, rng, work=work)
        if ok:
            return SolveResult(Status.SAT, a, i, work)
    return SolveResult(Status.NOT_FOUND, None, budget, work)
