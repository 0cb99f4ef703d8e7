"""(k,2)-CSP instances in nogood normal form, plus the text file format.

A formula has variables ``1..n`` taking values ``1..k``.  Every constraint is
a nogood: ``(x, c, y, d)`` forbids ``x = c`` together with ``y = d``.  Unary
nogoods are folded into per-variable domains, stored as bit masks where bit
``c - 1`` marks value ``c`` as allowed.

Residual formulas (after fixing some variables) keep the original variable
numbering and simply drop the fixed variables from ``domains``.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple

MAX_K = 64

Nogood = Tuple[int, int, int, int]
Assignment = Dict[int, int]


class Conflict(Exception):
    """Raised when fixing values empties a domain or violates a nogood."""


class ParseError(ValueError):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def bit(c: int) -> int:
    return 1 << (c - 1)


def values_of(mask: int) -> List[int]:
    """Values present in a domain mask, ascending."""
    out = []
    c = 1
    while mask:
        if mask & 1:
            out.append(c)
        mask >>= 1
        c += 1
    return out


def full_mask(k: int) -> int:
    return (1 << k) - 1


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True, eq=False)
class Formula:
    """An immutable, canonical (k,2)-CSP formula.

    Use :meth:`build` rather than the constructor; it validates and
    canonicalizes the nogood set.
    """

    n: int
    k: int
    domains: Mapping[int, int]
    nogoods: FrozenSet[Nogood]

    @classmethod
    def build(
        cls,
        n: int,
        k: int,
        nogoods: Iterable[Nogood] = (),
        unary: Iterable[Tuple[int, int]] = (),
        domains: Optional[Mapping[int, int]] = None,
    ) -> "Formula":
        if n < 0:
            raise ValueError(f"variable count must be non-negative, got {n}")
        if not 1 <= k <= MAX_K:
            raise ValueError(f"k must lie in 1..{MAX_K}, got {k}")
        if domains is None:
            doms = {x: full_mask(k) for x in range(1, n + 1)}
        else:
            doms = {}
            for x, mask in domains.items():
                _check_var(x, n)
                if mask >> k:
                    raise ValueError(f"domain of variable {x} has values above k={k}")
                doms[x] = mask
        for x, c in unary:
            _check_var(x, n)
            _check_val(c, k)
            if x in doms:
                doms[x] &= ~bit(c)
        return cls._canonical(n, k, doms, nogoods)

    @classmethod
    def _canonical(cls, n, k, doms, nogoods) -> "Formula":
        # same-variable pairs fold into domains; vacuous pairs are dropped
        pairs = set()
        for x, c, y, d in nogoods:
            _check_var(x, n)
            _check_var(y, n)
            _check_val(c, k)
            _check_val(d, k)
            if x == y:
                if c == d and x in doms:
                    doms[x] &= ~bit(c)
                continue
            if x > y:
                x, c, y, d = y, d, x, c
            pairs.add((x, c, y, d))
        kept = frozenset(
            g
            for g in pairs
            if g[0] in doms
            and g[2] in doms
            and doms[g[0]] & bit(g[1])
            and doms[g[2]] & bit(g[3])
        )
        return cls(n, k, dict(sorted(doms.items())), kept)

    def replace(self, domains=None, nogoods=None) -> "Formula":
        """Re-canonicalize with new domains and/or nogoods (same n, k)."""
        doms = dict(self.domains if domains is None else domains)
        return Formula._canonical(
            self.n, self.k, doms, self.nogoods if nogoods is None else nogoods
        )

    # -- views -------------------------------------------------------------

    @property
    def variables(self) -> List[int]:
        return list(self.domains)

    @property
    def trivially_unsat(self) -> bool:
        return any(m == 0 for m in self.domains.values())

    @property
    def unary_nogoods(self) -> List[Tuple[int, int]]:
        """Values excluded from live variables' domains, as (x, c) records."""
        full = full_mask(self.k)
        return [
            (x, c)
            for x, m in self.domains.items()
            for c in values_of(full & ~m)
        ]

    def domain(self, x: int) -> List[int]:
        return values_of(self.domains[x])

    @cached_property
    def adjacency(self) -> Dict[int, Dict[int, List[Tuple[int, int]]]]:
        """``adjacency[x][c]`` lists ``(y, d)`` such that (x, c, y, d) is a nogood."""
        adj: Dict[int, Dict[int, List[Tuple[int, int]]]] = {
            x: defaultdict(list) for x in self.domains
        }
        for x, c, y, d in self.nogoods:
            adj[x][c].append((y, d))
            adj[y][d].append((x, c))
        return adj

    @cached_property
    def incident(self) -> Dict[int, List[Nogood]]:
        """Nogoods mentioning each variable, in canonical orientation."""
        inc: Dict[int, List[Nogood]] = {x: [] for x in self.domains}
        for g in sorted(self.nogoods):
            inc[g[0]].append(g)
            inc[g[2]].append(g)
        return inc

    def key(self):
        return (self.n, self.k, tuple(self.domains.items()), tuple(sorted(self.nogoods)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Formula):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return (
            f"Formula(n={self.n}, k={self.k}, live={len(self.domains)}, "
            f"nogoods={len(self.nogoods)})"
        )

    # -- semantics ---------------------------------------------------------

    def satisfied_by(self, assignment: Mapping[int, int]) -> bool:
        """Direct scan: every live variable set inside its domain, no nogood hit."""
        for x, mask in self.domains.items():
            v = assignment.get(x)
            if v is None or not (1 <= v <= self.k) or not mask & bit(v):
                return False
        for x, c, y, d in self.nogoods:
            if assignment[x] == c and assignment[y] == d:
                return False
        return True

    def compact(self) -> Tuple["Formula", Dict[int, int]]:
        """Renumber live variables to 1..m; returns the formula and old->new map."""
        ren = {x: i for i, x in enumerate(self.domains, start=1)}
        doms = {ren[x]: m for x, m in self.domains.items()}
        goods = [(ren[x], c, ren[y], d) for x, c, y, d in self.nogoods]
        return Formula._canonical(len(ren), self.k, doms, goods), ren


def _check_var(x: int, n: int) -> None:
    if not 1 <= x <= n:
        raise ValueError(f"variable {x} outside 1..{n}")


def _check_val(c: int, k: int) -> None:
    if not 1 <= c <= k:
        raise ValueError(f"value {c} outside 1..{k}")


def check_assignment(f: Formula, a: Mapping[int, int]) -> None:
    for x, v in a.items():
        if x not in f.domains:
            raise ValueError(f"variable {x} is not live in the formula")
        if not 1 <= v <= f.k or not f.domains[x] & bit(v):
            raise ValueError(f"value {v} not in the domain of variable {x}")


def apply_assignment(f: Formula, a: Mapping[int, int]) -> Formula:
    """Residual formula after fixing ``a``.

    Fixed variables disappear; a nogood whose fixed side matches turns into a
    unary restriction on the other side.  Raises :class:`Conflict` when a
    nogood is violated outright or a domain empties.
    """
    check_assignment(f, a)
    if not a:
        return f
    doms = {x: m for x, m in f.domains.items() if x not in a}
    kept = []
    for g in f.nogoods:
        x, c, y, d = g
        ax, ay = a.get(x), a.get(y)
        if ax is None and ay is None:
            kept.append(g)
        elif ax is not None and ay is not None:
            if ax == c and ay == d:
                raise Conflict(f"nogood {g} violated")
        elif ax is not None:
            if ax == c:
                doms[y] &= ~bit(d)
        elif ay == d:
            doms[x] &= ~bit(c)
    for x, m in doms.items():
        if m == 0:
            raise Conflict(f"domain of variable {x} emptied")
    return Formula._canonical(f.n, f.k, doms, kept)


# -- file format -----------------------------------------------------------


def parse_instance(text) -> Formula:
    return parse_instance_with_solution(text)[0]


def parse_instance_with_solution(text) -> Tuple[Formula, Optional[Assignment]]:
    """Parse the ``p ucsp`` text format; returns the formula and any ``s`` line."""
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    header = None
    nogoods: List[Nogood] = []
    unary: List[Tuple[int, int]] = []
    solution = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tag, *rest = line.split()
        if tag == "p":
            if header is not None:
                raise ParseError(lineno, "duplicate header")
            if len(rest) != 3 or rest[0] != "ucsp":
                raise ParseError(lineno, "header must read 'p ucsp <n> <k>'")
            try:
                n, k = int(rest[1]), int(rest[2])
            except ValueError:
                raise ParseError(lineno, f"non-integer field in {line!r}") from None
            if n < 0 or not 1 <= k <= MAX_K:
                raise ParseError(lineno, f"bad header sizes n={n} k={k}")
            header = (n, k)
            continue
        if header is None:
            raise ParseError(lineno, "record before 'p ucsp' header")
        try:
            nums = [int(tok) for tok in rest]
        except ValueError:
            raise ParseError(lineno, f"non-integer field in {line!r}") from None
        n, k = header
        if tag == "c":
            if len(nums) != 4:
                raise ParseError(lineno, "binary nogood needs 4 fields")
            x, c, y, d = nums
            _range_check(lineno, n, k, (x, c), (y, d))
            nogoods.append((x, c, y, d))
        elif tag == "u":
            if len(nums) != 2:
                raise ParseError(lineno, "unary nogood needs 2 fields")
            _range_check(lineno, n, k, tuple(nums))
            unary.append((nums[0], nums[1]))
        elif tag == "s":
            if solution is not None:
                raise ParseError(lineno, "duplicate solution line")
            if len(nums) != n:
                raise ParseError(lineno, f"solution line needs {n} values")
            for v in nums:
                if not 1 <= v <= k:
                    raise ParseError(lineno, f"value {v} outside 1..{k}")
            solution = dict(enumerate(nums, start=1))
        else:
            raise ParseError(lineno, f"unknown record type {tag!r}")
    if header is None:
        raise ParseError(0, "missing 'p ucsp' header")
    return Formula.build(header[0], header[1], nogoods, unary), solution


def _range_check(lineno, n, k, *pairs) -> None:
    for x, c in pairs:
        if not 1 <= x <= n:
            raise ParseError(lineno, f"variable {x} outside 1..{n}")
        if not 1 <= c <= k:
            raise ParseError(lineno, f"value {c} outside 1..{k}")


def serialize_instance(f: Formula, solution: Optional[Mapping[int, int]] = None) -> bytes:
    """Canonical text form: header, sorted ``c`` records, sorted ``u`` records."""
    if list(f.domains) != list(range(1, f.n + 1)):
        raise ValueError("only formulas over all of 1..n serialize; call compact() first")
    lines = [f"p ucsp {f.n} {f.k}"]
    lines += [f"c {x} {c} {y} {d}" for x, c, y, d in sorted(f.nogoods)]
    lines += [f"u {x} {c}" for x, c in sorted(f.unary_nogoods)]
    if solution is not None:
        lines.append("s " + " ".join(str(solution[x]) for x in range(1, f.n + 1)))
    return ("\n".join(lines) + "\n").encode("utf-8")


def coloring_formula(n: int, edges: Iterable[Tuple[int, int]], k: int) -> Formula:
    """k-coloring of a graph on vertices 1..n as nogoods on equal colors."""
    return Formula.build(
        n, k, [(u, c, v, c) for u, v in edges for c in range(1, k + 1)]
    )
