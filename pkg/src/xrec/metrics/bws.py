"""Best-worst scaling aggregation for human preference counts."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class BwsCounts:
    best: int
    worst: int
    total: int

    def __post_init__(self):
        if self.total <= 0:
            raise ValueError("total comparisons must be positive")
        if self.best < 0 or self.worst < 0:
            raise ValueError("counts cannot be negative")
        if self.best + self.worst > self.total:
            raise ValueError("best + worst cannot exceed total")


def bws_score(counts: BwsCounts) -> float:
    """(chosen-best - chosen-worst) / total, in [-1, 1]."""
    return (counts.best - counts.worst) / counts.total
