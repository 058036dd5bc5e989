"""Stopping rule shared by the local search and the metaheuristics."""

from __future__ import annotations

import time
from dataclasses import dataclass


@dataclass
class Budget:
    """Wall-clock deadline and/or a cap on schedule decodes.

    With only ``max_evals`` set, a run is a pure function of its inputs; the
    wall clock is never consulted.
    """

    deadline: float | None = None  # time.monotonic() value
    max_evals: int | None = None
    evals: int = 0

    @classmethod
    def seconds(cls, limit: float) -> "Budget":
        return cls(deadline=time.monotonic() + limit)

    @classmethod
    def evaluations(cls, count: int) -> "Budget":
        return cls(max_evals=count)

    @property
    def timed(self) -> bool:
        return self.deadline is not None

    def exhausted(self) -> bool:
        if self.max_evals is not None and self.evals >= self.max_evals:
            return True
        return self.deadline is not None and time.monotonic() >= self.deadline

    def charge(self, count: int = 1) -> None:
        self.evals += count

    def clock(self) -> float:
        """Progress measure: seconds when timed, decodes otherwise."""
        return time.monotonic() if self.timed else float(self.evals)


