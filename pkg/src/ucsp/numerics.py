from __future__ import annotations

import math
from typing import Callable, Iterable


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 48,
) -> float:
    """Adaptive Simpson quadrature with Richardson correction.

    ``tol`` is an absolute target for the whole interval; each half gets half
    of its parent's budget.
    """
    if a == b:
        return 0.0
    fa, fm, fb = f(a), f((a + b) / 2), f(b)
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    return _simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = (a + b) / 2
    lm, rm = (a + m) / 2, (m + b) / 2
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6 * (fa + 4 * flm + fm)
    right = (b - m) / 6 * (fm + 4 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15 * tol:
        return left + right + delta / 15
    return _simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) + _simpson_rec(
        f, m, b, fm, frm, fb, right, tol / 2, depth - 1
    )


def integrate_pieces(
    f: Callable[[float], float], breaks: Iterable[float], tol: float = 1e-10
) -> float:
    """Integrate over consecutive break points, splitting the tolerance evenly."""
    pts = sorted(set(breaks))
    if len(pts) < 2:
        return 0.0
    share = tol / (len(pts) - 1)
    return math.fsum(adaptive_simpson(f, lo, hi, share) for lo, hi in zip(pts, pts[1:]))


def bisect_increasing(g: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-15) -> float:
    """Root of an increasing function with g(lo) <= 0 <= g(hi)."""
    while hi - lo > xtol:
        mid = (lo + hi) / 2
        if mid <= lo or mid >= hi:
            break
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def golden_section(
    f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-6
) -> float:
    """Minimizer of a unimodal function on [lo, hi]."""
    inv = (math.sqrt(5) - 1) / 2
    c = hi - inv * (hi - lo)
    d = lo + inv * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > xtol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - inv * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv * (hi - lo)
            fd = f(d)
    return (lo + hi) / 2
