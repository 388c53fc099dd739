"""Sampling policies for adaptive multi-stream experiments.

All selectors are deterministic functions of the arm statistics apart
from an injected random generator; ties break toward the lowest index
and unpulled arms are taken round-robin before any score is computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from betstream.confseq import bai_exploration_radius

__all__ = [
    "ArmStats",
    "hdoc_select",
    "lucb_select",
    "uniform_select",
    "epsilon_greedy_select",
]


@dataclass
class ArmStats:
    """Per-arm pull counts and running sums plus the global time."""

    counts: np.ndarray
    sums: np.ndarray
    t: int = 0

    @classmethod
    def fresh(cls, w: int) -> "ArmStats":
        if w < 1:
            raise ValueError(f"need at least one arm, got {w}")
        return cls(counts=np.zeros(w, dtype=np.int64), sums=np.zeros(w))

    @property
    def w(self) -> int:
        return self.counts.size

    def update(self, arm: int, x: float) -> None:
        if not 0 <= arm < self.w:
            raise IndexError(f"arm {arm} out of range for {self.w} arms")
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"observation {x!r} outside [0, 1]")
        self.counts[arm] += 1
        self.sums[arm] += x
        self.t += 1

    def mean(self, arm: int) -> float:
        if self.counts[arm] == 0:
            raise ValueError(f"arm {arm} has no observations")
        return float(self.sums[arm] / self.counts[arm])


def _first_unpulled(stats: ArmStats, arms) -> int | None:
    for a in arms:
        if stats.counts[a] == 0:
            return a
    return None


def _argmax_lowest(arms, score) -> int:
    best, best_score = None, -math.inf
    for a in arms:
        s = score(a)
        if s > best_score:
            best, best_score = a, s
    return best


def hdoc_select(stats: ArmStats, active) -> int:
    """Upper-confidence selection mean + sqrt(log t / (2 N)) over `active`.

    Unpulled active arms are taken first in index order.
    """
    active = sorted(active)
    if not active:
        raise ValueError("active arm set is empty")
    unpulled = _first_unpulled(stats, active)
    if unpulled is not None:
        return unpulled
    if stats.t < 1:
        raise ValueError("need at least one observation before scoring")
    bonus_t = math.log(stats.t)
    return _argmax_lowest(
        active, lambda a: stats.mean(a) + math.sqrt(bonus_t / (2.0 * stats.counts[a]))
    )


def lucb_select(stats: ArmStats, alpha: float) -> tuple[int, int]:
    """Empirical leader plus the highest upper-confidence challenger.

    Requires every arm pulled at least once (run a round-robin
    initialization first). Both returned arms are meant to be pulled in
    the same round.
    """
    if stats.w < 2:
        raise ValueError(f"leader/challenger selection needs >= 2 arms, got {stats.w}")
    if (stats.counts == 0).any():
        raise ValueError("every arm must be pulled once before selection")
    leader = _argmax_lowest(range(stats.w), stats.mean)
    others = [a for a in range(stats.w) if a != leader]
    challenger = _argmax_lowest(
        others,
        lambda a: stats.mean(a)
        + bai_exploration_radius(stats.t, int(stats.counts[a]), alpha, stats.w),
    )
    return leader, challenger


def uniform_select(rng: np.random.Generator, w: int) -> int:
    """Each arm with probability 1/W."""
    if w < 1:
        raise ValueError(f"need at least one arm, got {w}")
    return int(rng.integers(w))


def epsilon_greedy_select(
    stats: ArmStats, rng: np.random.Generator, epsilon: float
) -> int:
    """Greedy on the running means except for an epsilon exploration draw."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    unpulled = _first_unpulled(stats, range(stats.w))
    if unpulled is not None:
        return unpulled
    if rng.random() < epsilon:
        return uniform_select(rng, stats.w)
    return _argmax_lowest(range(stats.w), stats.mean)
