"""Solver laboratory for Unique (k,2)-CSP: PPSZ, extended Beigel-Eppstein,
their hybrid, and the analysis of their running-time exponents."""

from .formula import (
    Conflict,
    Formula,
    ParseError,
    apply_assignment,
    parse_instance,
    parse_instance_with_solution,
    serialize_instance,
)
from .work import SolveResult, Status, Work

__all__ = [
    "Conflict",
    "Formula",
    "ParseError",
    "SolveResult",
    "Status",
    "Work",
    "apply_assignment",
    "parse_instance",
    "parse_instance_with_solution",
    "serialize_instance",
]
__version__ = "0.1.0"
