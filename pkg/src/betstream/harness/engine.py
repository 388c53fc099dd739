"""Streaming evaluator for sequential region tests over live streams.

Keeps per-arm caches (stream, coordinatewise capital minimizer, capital
at the minimizer) so threshold-region minima cost O(W) per test, and
best-arm minima run the tie-level solve only when a cheap feasible-point
upper bound shows a crossing is possible. Decision timelines are exactly
those of evaluating every region at every observation: skipped solves
are only skipped when the region minimum provably sits below threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from betstream.capital import StreamConfig, StreamState, observe
from betstream.joint import JointState
from betstream.regions import (
    BestArm,
    Point,
    Polytope,
    Region,
    ThresholdAbove,
    ThresholdBelow,
    _minimize_bai_log,
    _minimize_polytope_log,
)

__all__ = ["ArmCache", "RegionTestEngine"]


def _logmeanexp_small(vals) -> float:
    """logmeanexp over a short plain list without array overhead."""
    mx = max(vals)
    if mx == -math.inf or math.isinf(mx):
        return mx
    return mx + math.log(sum(math.exp(v - mx) for v in vals) / len(vals))

WARM_Q_HALFWIDTH = 0.02
# cache tolerance: a coordinate error d changes the region minimum by
# O(curvature * d^2), far below decision sensitivity at 1e-9
CACHE_MINIMIZER_TOL = 1e-9
NEWTON_MAX_ITER = 80


class ArmCache:
    """One stream plus cached minimizer quantities, refreshed lazily.

    Keeps per-record sums s = mu_prev + x and products p = mu_prev * x
    for the records after the first (whose factor is identically 1), so
    a capital or derivative evaluation is a handful of vector operations.
    The minimizer refresh is a safeguarded Newton iteration warm-started
    at the previous value; one new observation barely moves the root, so
    it usually converges in a step or two.
    """

    def __init__(self, cfg: StreamConfig, xi: float | None = None):
        self.cfg = cfg
        self.xi = xi
        self.stream = StreamState.empty()
        self.m_star = 0.5
        self.log_k_min = 0.0
        self.log_k_xi = 0.0
        self._s = np.empty(0)
        self._p = np.empty(0)
        self._stale = False

    def add(self, x: float) -> None:
        prev = self.stream
        self.stream = observe(prev, x)
        if prev.n > 0:
            mu_prev = prev.sum_x / prev.n
            self._s = np.append(self._s, mu_prev + x)
            self._p = np.append(self._p, mu_prev * x)
        self._stale = True

    def log_k(self, m: float) -> float:
        if self._s.size == 0:
            return 0.0
        prod = self._p - m * self._s + m * m
        return float(np.log1p(prod / self.cfg.c).sum())

    def _dlog_d2log(self, m: float) -> tuple[float, float]:
        denom = self._p - m * self._s + (m * m + self.cfg.c)
        ratio = (2.0 * m - self._s) / denom
        dlog = float(ratio.sum())
        d2log = float((2.0 / denom).sum() - (ratio * ratio).sum())
        return dlog, d2log

    def refresh(self) -> None:
        if not self._stale:
            return
        if self._s.size == 0:
            self.m_star, self.log_k_min = 0.5, 0.0
        else:
            self.m_star = self._newton(self.m_star)
            self.log_k_min = self.log_k(self.m_star)
        if self.xi is not None:
            self.log_k_xi = self.log_k(self.xi)
        self._stale = False

    def _newton(self, start: float) -> float:
        lo, hi = 0.0, 1.0
        m = min(max(start, 0.0), 1.0)
        for _ in range(NEWTON_MAX_ITER):
            dlog, d2log = self._dlog_d2log(m)
            if dlog < 0.0:
                lo = max(lo, m)
            else:
                hi = min(hi, m)
            if hi - lo <= CACHE_MINIMIZER_TOL:
                break
            if d2log > 0.0:
                nxt = m - dlog / d2log
            else:
                nxt = 0.5 * (lo + hi)
            if not lo < nxt < hi:
                nxt = 0.5 * (lo + hi)
            # quadratic convergence: applying a step below 1e-6 leaves a
            # residual around 1e-12, so take it and stop
            if abs(nxt - m) <= 1e-6 and lo < nxt < hi:
                return nxt
            m = nxt
        return 0.5 * (lo + hi)


@dataclass
class _RegionSlot:
    region: Region
    active: bool = True
    decided_at: int | None = None
    running_log: float = -math.inf
    warm_q: float | None = None
    point_logs: np.ndarray | None = None  # per-arm log capital for Point regions

    def __post_init__(self):
        # per-arm memo for capitals evaluated at the warm tie level:
        # arm -> (stream version, q, log capital)
        self.memo: dict[int, tuple[int, float, float]] = {}


class RegionTestEngine:
    """Feed observations, get exact first-rejection times per region."""

    def __init__(
        self,
        w: int,
        cfg: StreamConfig,
        alpha: float,
        regions: list[Region],
        xi: float | None = None,
    ):
        if w < 1:
            raise ValueError(f"need at least one arm, got {w}")
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {alpha}")
        self.w = w
        self.cfg = cfg
        self.alpha = alpha
        self.log_thr = -math.log(alpha)
        self.t = 0
        self.caches = [ArmCache(cfg, xi=xi) for _ in range(w)]
        self.versions = [0] * w
        self.slots = [_RegionSlot(region=r) for r in regions]
        for slot in self.slots:
            if isinstance(slot.region, Point):
                slot.point_logs = np.zeros(w)

    # -- stream updates ----------------------------------------------------

    def observe(self, arm: int, x: float) -> None:
        if not 0 <= arm < self.w:
            raise IndexError(f"arm {arm} out of range for {self.w} streams")
        cache = self.caches[arm]
        stream = cache.stream
        mu_prev = None if stream.n == 0 else stream.sum_x / stream.n
        cache.add(x)
        self.t += 1
        self.versions[arm] += 1
        if mu_prev is None:
            return  # first factor is 1 for every hypothesis
        for slot in self.slots:
            if slot.point_logs is not None and slot.active and slot.decided_at is None:
                m_a = float(slot.region.m[arm])
                slot.point_logs[arm] += math.log1p(
                    (mu_prev - m_a) * (x - m_a) / self.cfg.c
                )

    def deactivate(self, index: int) -> None:
        self.slots[index].active = False

    def decisions(self) -> list[int | None]:
        return [slot.decided_at for slot in self.slots]

    # -- evaluation --------------------------------------------------------

    def _joint_view(self) -> JointState:
        return JointState(
            streams=tuple(c.stream for c in self.caches),
            cfg=self.cfg,
            t=self.t,
            pulls=tuple(c.stream.n for c in self.caches),
        )

    def _mins(self) -> np.ndarray:
        return np.array([c.m_star for c in self.caches])

    def _log_e_threshold(self, slot: _RegionSlot) -> float:
        region = slot.region
        cache = self.caches[region.arm]
        logs = [c.log_k_min for c in self.caches]
        clamp_needed = (
            cache.m_star > region.xi
            if isinstance(region, ThresholdBelow)
            else cache.m_star < region.xi
        )
        if clamp_needed:
            if cache.xi is not None and region.xi == cache.xi:
                logs[region.arm] = cache.log_k_xi
            else:
                logs[region.arm] = cache.log_k(region.xi)
        return _logmeanexp_small(logs)

    def _log_k_at_tie(self, slot: _RegionSlot, arm: int, q: float) -> float:
        entry = slot.memo.get(arm)
        version = self.versions[arm]
        if entry is not None and entry[0] == version and entry[1] == q:
            return entry[2]
        value = self.caches[arm].log_k(q)
        slot.memo[arm] = (version, q, value)
        return value

    def _log_e_best_arm(self, slot: _RegionSlot) -> float | None:
        """Exact region-minimum log value, or None when it provably cannot
        cross the threshold this step.

        The skip test evaluates the pooled capital at the feasible point
        built from the last solve's tie level; that value upper-bounds
        the region minimum, so staying below threshold is conclusive.
        """
        target = slot.region.arm
        caches = self.caches
        mins = self._mins()
        others_max = max(
            (float(mins[a]) for a in range(self.w) if a != target), default=-math.inf
        )
        if self.w == 1 or mins[target] >= others_max:
            return _logmeanexp_small([c.log_k_min for c in caches])
        q_ref = slot.warm_q if slot.warm_q is not None else float(mins[target])
        q_ref = min(max(q_ref, float(mins[target])), others_max)
        bound_logs = [
            caches[a].log_k_min
            if (a != target and mins[a] < q_ref)
            else self._log_k_at_tie(slot, a, q_ref)
            for a in range(self.w)
        ]
        bound = _logmeanexp_small(bound_logs)
        thr = 1.0 / self.alpha
        if math.exp(bound) < thr and math.exp(slot.running_log) < thr:
            return None
        bracket = None
        if slot.warm_q is not None:
            bracket = (slot.warm_q - WARM_Q_HALFWIDTH, slot.warm_q + WARM_Q_HALFWIDTH)
        point, logv = _minimize_bai_log(
            self._joint_view(), target, m_star=mins, q_bracket=bracket, q_tol=1e-7
        )
        slot.warm_q = float(point[target])
        return logv

    def step(self) -> list[int]:
        """Evaluate every live region at the current time; returns indices
        of regions newly rejected at this step."""
        for cache in self.caches:
            cache.refresh()
        newly = []
        for idx, slot in enumerate(self.slots):
            if not slot.active or slot.decided_at is not None:
                continue
            region = slot.region
            if slot.point_logs is not None:
                logv = _logmeanexp_small(slot.point_logs.tolist())
            elif isinstance(region, (ThresholdBelow, ThresholdAbove)):
                logv = self._log_e_threshold(slot)
            elif isinstance(region, BestArm):
                logv = self._log_e_best_arm(slot)
                if logv is None:
                    continue
            elif isinstance(region, Polytope):
                _, logv = _minimize_polytope_log(self._joint_view(), region)
            else:
                raise TypeError(f"not a region: {region!r}")
            if logv > slot.running_log:
                slot.running_log = logv
            if math.exp(slot.running_log) >= 1.0 / self.alpha:
                slot.decided_at = self.t
                newly.append(idx)
        return newly
