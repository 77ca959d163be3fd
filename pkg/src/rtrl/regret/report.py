"""Result container shared by the regret measures."""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["RegretReport"]


@dataclass(frozen=True)
class RegretReport:
    """Per-step (or per-decision) regret estimate with a 95% interval.

    ``optimal_rate`` and ``policy_rate`` are the two Monte Carlo terms, each
    averaged over the same number of scored steps, so their difference is a
    like-for-like regret rate rather than a mix of horizons.
    """

    steps: int
    rollouts: int
    optimal_rate: float
    policy_rate: float
    regret_per_step: float
    ci: float

    def __post_init__(self):
        if self.steps < 0 or self.rollouts < 0:
            raise ValueError("steps and rollouts must be non-negative")
