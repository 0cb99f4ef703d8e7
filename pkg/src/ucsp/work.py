from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional


@dataclass
class Work:
    """Machine-independent effort: PPSZ settlements plus search-node expansions."""

    settlements: int = 0
    nodes: int = 0

    @property
    def total(self) -> int:
        return self.settlements + self.nodes

    def add(self, other: "Work") -> None:
        self.settlements += other.settlements
        self.nodes += other.nodes


class Status(str, Enum):
    SAT = "sat"
    UNSAT = "unsat"
    NOT_FOUND = "not_found"


@dataclass
class SolveResult:
    status: Status
    assignment: Optional[Dict[int, int]] = None
    iterations: int = 0
    work: Work = field(default_factory=Work)

    @property
    def found(self) -> bool:
        return self.status is Status.SAT
