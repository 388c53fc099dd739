"""Per-arm capital processes and their average across arms.

Each arm keeps its own capital process; steps that pull other arms
multiply it by 1. The pooled evidence for a joint hypothesis vector m
is the plain average of the per-arm capitals, which stays a nonnegative
martingale under the true mean vector for any sampling policy, and
dominates the union-bound test that thresholds each arm at W/alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from betstream.capital import StreamConfig, StreamState, capital, log_capital, observe

__all__ = [
    "JointState",
    "TestTracker",
    "joint_observe",
    "joint_capital",
    "log_joint_capital",
    "crossed",
    "step_point_test",
    "union_test",
    "empirical_e_power",
]


@dataclass(eq=False)
class JointState:
    """W streams plus the shared betting configuration.

    pulls[a] equals streams[a].n and the pull counts sum to t. Updates
    return new states; existing ones stay valid and shareable.
    """

    streams: tuple[StreamState, ...]
    cfg: StreamConfig
    t: int = 0
    pulls: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.pulls:
            self.pulls = tuple(s.n for s in self.streams)

    @classmethod
    def fresh(cls, w: int, cfg: StreamConfig | None = None) -> "JointState":
        if w < 1:
            raise ValueError(f"need at least one arm, got {w}")
        cfg = cfg or StreamConfig()
        return cls(streams=tuple(StreamState.empty() for _ in range(w)), cfg=cfg)

    @property
    def w(self) -> int:
        return len(self.streams)


def joint_observe(joint: JointState, arm: int, x: float) -> JointState:
    """Feed one observation to stream `arm`; other streams are untouched."""
    if not 0 <= arm < joint.w:
        raise IndexError(f"arm {arm} out of range for {joint.w} streams")
    streams = list(joint.streams)
    streams[arm] = observe(streams[arm], x)
    pulls = list(joint.pulls)
    pulls[arm] += 1
    return JointState(
        streams=tuple(streams), cfg=joint.cfg, t=joint.t + 1, pulls=tuple(pulls)
    )


def _check_vector(joint: JointState, m) -> np.ndarray:
    vec = np.asarray(m, dtype=float).reshape(-1)
    if vec.size != joint.w:
        raise ValueError(f"hypothesis has {vec.size} coordinates, expected {joint.w}")
    return vec


def log_joint_capital(joint: JointState, m) -> float:
    """Log of the averaged per-arm capital at hypothesis vector m."""
    vec = _check_vector(joint, m)
    logs = np.array(
        [log_capital(s, joint.cfg, float(vec[a])) for a, s in enumerate(joint.streams)]
    )
    return logmeanexp(logs)


def joint_capital(joint: JointState, m) -> float:
    """Average of the per-arm capitals; 1 before any data."""
    return float(np.exp(log_joint_capital(joint, m)))


def logmeanexp(logs: np.ndarray) -> float:
    """log of the mean of exp(logs), safe against overflow and -inf."""
    mx = np.max(logs)
    if mx == -math.inf:
        return -math.inf
    if math.isinf(mx):
        return math.inf
    return float(mx + np.log(np.exp(logs - mx).mean()))


@dataclass
class TestTracker:
    """One sequential test in flight.

    region is a Region value or a raw hypothesis vector for point tests.
    running_extreme is the largest tracked statistic so far; decided_at
    is the time index of the first threshold crossing. Decisions are
    sticky: once rejected, the test stays rejected.
    """

    region: object
    alpha: float
    running_extreme: float = 0.0
    decided_at: int | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")

    @property
    def rejected(self) -> bool:
        return self.decided_at is not None


def crossed(value: float, alpha: float) -> bool:
    """Rejection threshold check: evidence at least 1/alpha."""
    return value >= 1.0 / alpha


def _point_vector(region, w: int) -> np.ndarray:
    from betstream.regions import Point

    if isinstance(region, Point):
        vec = np.asarray(region.m, dtype=float)
    else:
        vec = np.asarray(region, dtype=float).reshape(-1)
    if vec.size != w:
        raise ValueError(f"point hypothesis has {vec.size} coordinates, expected {w}")
    return vec


def step_point_test(tracker: TestTracker, joint: JointState) -> bool:
    """Advance a point-hypothesis test; True once rejected (sticky)."""
    if tracker.decided_at is not None:
        return True
    vec = _point_vector(tracker.region, joint.w)
    value = joint_capital(joint, vec)
    if value > tracker.running_extreme:
        tracker.running_extreme = value
    if crossed(tracker.running_extreme, tracker.alpha):
        tracker.decided_at = joint.t
        return True
    return False


def union_test(trackers: Sequence[TestTracker], joint: JointState) -> bool:
    """Union-bound comparator: every arm's own capital must cross W/alpha.

    Expects one tracker per arm, each holding that arm's scalar
    hypothesis and level alpha/W (so 1/alpha on the tracker equals the
    W/alpha threshold of the union bound). Rejects only when all arms
    have crossed.
    """
    if len(trackers) != joint.w:
        raise ValueError(f"need {joint.w} per-arm trackers, got {len(trackers)}")
    for arm, tr in enumerate(trackers):
        if tr.decided_at is not None:
            continue
        m_a = float(np.asarray(tr.region, dtype=float).reshape(-1)[0])
        value = capital(joint.streams[arm], joint.cfg, m_a)
        if value > tr.running_extreme:
            tr.running_extreme = value
        if crossed(tr.running_extreme, tr.alpha):
            tr.decided_at = joint.t
    return all(tr.decided_at is not None for tr in trackers)


def empirical_e_power(joint: JointState, m) -> float:
    """Realized growth-rate diagnostic log(E_t(m)) / t.

    This is a per-step average of realized evidence, not a theorem-backed
    quantity; it converges to the closed-form Bernoulli growth rate under
    Bernoulli data. -inf when the joint capital has died to 0.
    """
    if joint.t < 1:
        raise ValueError("empirical e-power needs at least one observation")
    return log_joint_capital(joint, m) / joint.t
