"""The answer candidate type shared by all three solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass

SOLVER_SP = "sp"
SOLVER_LD = "ld"
SOLVER_RR = "rr"
SOLVER_ORDER = (SOLVER_SP, SOLVER_LD, SOLVER_RR)


@dataclass(frozen=True)
class AnswerCandidate:
    answer: str
    confidence: float
    solver: str
    provenance: str = ""

    def __post_init__(self):
        if not self.answer:
            raise ValueError("answer must be non-empty")
        if not math.isfinite(self.confidence):
            raise ValueError("confidence must be finite")
        if self.solver not in SOLVER_ORDER:
            raise ValueError(f"unknown solver tag {self.solver!r}")
