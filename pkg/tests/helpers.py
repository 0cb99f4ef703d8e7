"""Shared generators and oracles for the test suite."""

from __future__ import annotations

import itertools
import random
from typing import Dict, Mapping, Optional

from hypothesis import strategies as st

from ucsp.formula import Formula, bit, serialize_instance, values_of


def random_formula(
    rng: random.Random,
    n: int,
    k: int,
    density: float = 0.3,
    unary_p: float = 0.1,
    max_domain: Optional[int] = None,
) -> Formula:
    """Each possible binary nogood kept with probability ``density``."""
    goods = [
        (x, c, y, d)
        for x, y in itertools.combinations(range(1, n + 1), 2)
        for c in range(1, k + 1)
        for d in range(1, k + 1)
        if rng.random() < density
    ]
    doms = {}
    for x in range(1, n + 1):
        vals = [c for c in range(1, k + 1) if rng.random() >= unary_p] or [rng.randint(1, k)]
        if max_domain is not None and len(vals) > max_domain:
            vals = rng.sample(vals, max_domain)
        doms[x] = sum(bit(c) for c in vals)
    return Formula.build(n, k, goods, domains=doms)


@st.composite
def formulas(draw, max_n: int = 5, max_k: int = 4, max_nogoods: int = 12, min_n: int = 1):
    n = draw(st.integers(min_n, max_n))
    k = draw(st.integers(1, max_k))
    var = st.integers(1, n)
    val = st.integers(1, k)
    goods = draw(st.lists(st.tuples(var, val, var, val), max_size=max_nogoods))
    unary = draw(st.lists(st.tuples(var, val), max_size=n))
    return Formula.build(n, k, goods, unary)


@st.composite
def formula_and_partial(draw, **kw):
    """A formula plus a partial assignment that respects the domains."""
    f = draw(formulas(**kw))
    a: Dict[int, int] = {}
    for x, m in f.domains.items():
        if m and draw(st.booleans()):
            a[x] = draw(st.sampled_from(values_of(m)))
    return f, a


def independent_check(f: Formula, assignment: Mapping[int, int]) -> bool:
    """Re-read the serialized text and test every record against ``assignment``.

    Shares no code with :meth:`Formula.satisfied_by`.
    """
    text = serialize_instance(f).decode()
    for line in text.splitlines():
        tag, *nums = line.split()
        if tag == "p":
            n, k = int(nums[1]), int(nums[2])
            if sorted(assignment) != list(range(1, n + 1)):
                return False
            if any(not 1 <= v <= k for v in assignment.values()):
                return False
        elif tag == "c":
            x, c, y, d = map(int, nums)
            if assignment[x] == c and assignment[y] == d:
                return False
        elif tag == "u":
            x, c = map(int, nums)
            if assignment[x] == c:
                return False
    return True


def exhaustive_solutions(f: Formula):
    """Plain nested enumeration, one assignment at a time."""
    xs = list(f.domains)
    for combo in itertools.product(*(values_of(f.domains[x]) for x in xs)):
        a = dict(zip(xs, combo))
        if all(not (a[x] == c and a[y] == d) for x, c, y, d in f.nogoods):
            yield a
