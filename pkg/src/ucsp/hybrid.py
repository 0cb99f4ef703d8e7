"""Truncated PPSZ followed by extended BE, with restarts.

One hybrid iteration settles a prefix of a random time order PPSZ-style,
shrinks every remaining domain to its eligible set, and hands the residual
to :func:`ucsp.be.extended_be`.

:func:`solve_hybrid` repeats iterations under a restart schedule: a number
of independent runs, each cut off after a fixed amount of work.  With
``mix`` enabled each run alternates hybrid iterations with plain PPSZ ones.
"""

from __future__ import annotations

import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import List, Optional, Tuple

from .analysis import PUBLISHED_CUTOFFS, cost, optimize_t
from .be import extended_be
from .formula import Conflict, Formula, apply_assignment, popcount
from .ppsz import TimeDraw, ppsz_truncated
from .work import SolveResult, Status, Work


@lru_cache(maxsize=None)
def default_cutoff(k: int) -> float:
    """Cutoff minimizing the analytic cost, rounded to 0.01 (0 for k < 3)."""
    if k < 3:
        return 0.0
    if k in PUBLISHED_CUTOFFS:
        return PUBLISHED_CUTOFFS[k]
    return round(optimize_t(k)[0], 2)


@dataclass(frozen=True)
class HybridConfig:
    t: float
    D: int = 1
    k: Optional[int] = None
    restart_budget_exponent: Optional[float] = None
    mix: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"t must lie in [0, 1], got {self.t}")
        if self.restart_budget_exponent is not None and self.restart_budget_exponent < 0:
            raise ValueError("restart budget exponent must be non-negative")

    @classmethod
    def for_k(cls, k: int, **kw) -> "HybridConfig":
        return cls(t=default_cutoff(k), k=k, **kw)


def hybrid_iteration(
    f: Formula,
    cfg: HybridConfig,
    rng: Optional[random.Random] = None,
    times: Optional[TimeDraw] = None,
    work: Optional[Work] = None,
) -> SolveResult:
    rng = rng if rng is not None else random.Random()
    work = work if work is not None else Work()
    trace = ppsz_truncated(f, cfg.t, cfg.D, rng, times=times, work=work)
    if trace.aborted:
        # with nothing guessed the refutation is unconditional
        status = Status.NOT_FOUND if trace.prefix_assignment else Status.UNSAT
        return SolveResult(status, iterations=1, work=work)
    prefix = trace.prefix_assignment
    try:
        residual = apply_assignment(f, prefix)
    except Conflict:
        return SolveResult(Status.NOT_FOUND, iterations=1, work=work)
    residual = residual.replace(
        domains={x: m & trace.eligible[x] for x, m in residual.domains.items()}
    )
    res = extended_be(residual, rng, work)
    if res.status is Status.SAT:
        combined = dict(prefix)
        combined.update(res.assignment)
        if not f.satisfied_by(combined):
            raise AssertionError("hybrid iteration produced a non-satisfying assignment")
        return SolveResult(Status.SAT, combined, 1, work)
    if res.status is Status.UNSAT and not prefix:
        # nothing was guessed: only implied values were removed
        return SolveResult(Status.UNSAT, iterations=1, work=work)
    return SolveResult(Status.NOT_FOUND, iterations=1, work=work)


def restart_schedule(expected_exponent: float) -> Tuple[int, int]:
    """(number of runs, work cutoff per run) for expected log2-work E.

    6(E+1) runs each stopped after 400 * 2^E steps succeed with
    probability at least 0.99.
    """
    if expected_exponent < 0:
        raise ValueError("expected exponent must be non-negative")
    E = expected_exponent
    return math.ceil(6 * (E + 1)), math.ceil(400 * 2**E)


def expected_exponent(f: Formula, cfg: HybridConfig) -> float:
    """log2 of the analytic expected work, with a log2(n+1) allowance per iteration."""
    n = len(f.domains)
    k = max((popcount(m) for m in f.domains.values()), default=1)
    poly = math.log2(n + 1)
    if k < 3:
        return poly
    return n * cost(k, cfg.t) * math.log2(k) + poly


def _run(args) -> Tuple[SolveResult, int]:
    f, cfg, seed, cutoff, deadline = args
    rng = random.Random(seed)
    work = Work()
    arms = [cfg.t, 1.0] if cfg.mix else [cfg.t]
    arm_cfgs = [replace(cfg, t=t) for t in arms]
    iters = 0
    while work.total + iters < cutoff:
        if deadline is not None and time.monotonic() > deadline:
            break
        res = hybrid_iteration(f, arm_cfgs[iters % len(arm_cfgs)], rng, work=work)
        iters += 1
        if res.status is not Status.NOT_FOUND:
            return SolveResult(res.status, res.assignment, iters, work), seed
    return SolveResult(Status.NOT_FOUND, None, iters, work), seed


def solve_hybrid(
    f: Formula,
    cfg: HybridConfig,
    rng: Optional[random.Random] = None,
    wallclock: Optional[float] = None,
    jobs: int = 1,
) -> SolveResult:
    """Run the restart schedule; the lowest-numbered successful run wins.

    Results do not depend on ``jobs``: runs draw their seeds from ``rng`` in
    order and are reported in order.
    """
    rng = rng if rng is not None else random.Random()
    E = cfg.restart_budget_exponent
    if E is None:
        E = expected_exponent(f, cfg)
    runs, cutoff = restart_schedule(E)
    seeds = [rng.getrandbits(64) for _ in range(runs)]
    deadline = None if wallclock is None else time.monotonic() + wallclock
    total = Work()
    iterations = 0
    tasks = [(f, cfg, s, cutoff, deadline) for s in seeds]
    pool = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        for start in range(0, runs, max(jobs, 1)):
            batch = tasks[start : start + max(jobs, 1)]
            outcomes: List[Tuple[SolveResult, int]] = (
                list(pool.map(_run, batch)) if pool else [_run(batch[0])]
            )
            for res, _ in outcomes:
                total.add(res.work)
                iterations += res.iterations
                if res.status is not Status.NOT_FOUND:
                    return SolveResult(res.status, res.assignment, iterations, total)
            if deadline is not None and time.monotonic() > deadline:
                break
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)
    return SolveResult(Status.NOT_FOUND, None, iterations, total)
