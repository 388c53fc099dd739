"""Single-stream confidence sequences with running-intersection semantics.

The capital-inversion interval is the set of means whose capital process
has never crossed 1/alpha; convexity of the process in the hypothesis
makes that set an interval at every time, found by bisecting for the two
threshold crossings around the minimizer. The remaining methods are
standard closed-form or capital-based baselines for bounded data:
a predictable-plugin Hoeffding interval, an empirical-Bernstein
interval, a hedged two-sided capital test on a hypothesis grid, an
adaptive truncated bet, and fixed-width exploration bounds used by
bandit stopping rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from betstream.capital import (
    StreamConfig,
    StreamState,
    log_capital,
    minimizer,
    observe,
)

__all__ = [
    "PeakIntervalTracker",
    "peak_interval",
    "PrPlHState",
    "prplh_lambda",
    "prplh_update",
    "EmpBernState",
    "empbern_lambda",
    "psi_e",
    "empbern_update",
    "hedged_membership",
    "HedgedGridTracker",
    "agrapa_lambda",
    "agrapa_lambda_raw",
    "base_bound_thr",
    "base_bound_bai",
    "bai_exploration_radius",
]

PEAK_ENDPOINT_TOL = 1e-6


# ---------------------------------------------------------------------------
# Capital-inversion interval


@dataclass
class PeakIntervalTracker:
    """Running intersection of the capital sub-level sets over time.

    lo/hi bound the means whose running-max capital stays below
    1/alpha. `empty` flags the (type-I) event that every mean has been
    rejected; lo and hi then both sit at the last minimizer.
    """

    cfg: StreamConfig
    alpha: float
    lo: float = 0.0
    hi: float = 1.0
    empty: bool = False

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        self._stream = StreamState.empty()

    @property
    def stream(self) -> StreamState:
        return self._stream

    def interval(self) -> tuple[float, float]:
        return self.lo, self.hi

    def observe(self, x: float) -> tuple[float, float]:
        self._stream = observe(self._stream, x)
        self._shrink()
        return self.interval()

    def _log_k(self, m: float) -> float:
        return log_capital(self._stream, self.cfg, m)

    def _shrink(self) -> None:
        if self.empty:
            return
        log_thr = -math.log(self.alpha)
        k_lo = self._log_k(self.lo)
        k_hi = self._log_k(self.hi)
        if k_lo < log_thr and k_hi < log_thr:
            # Convexity: the maximum over [lo, hi] sits at an endpoint,
            # so the whole current interval survives this step.
            return
        m_star = minimizer(self._stream, self.cfg)
        m_star = min(max(m_star, self.lo), self.hi)
        if self._log_k(m_star) >= log_thr:
            self.lo = self.hi = m_star
            self.empty = True
            return
        if k_lo >= log_thr:
            self.lo = self._cross(self.lo, m_star, log_thr)
        if k_hi >= log_thr:
            self.hi = self._cross(self.hi, m_star, log_thr)

    def _cross(self, bad: float, good: float, log_thr: float) -> float:
        """Bisect for the threshold crossing between a rejected point and a
        kept one; returns the kept side of the final bracket."""
        while abs(good - bad) > PEAK_ENDPOINT_TOL:
            mid = 0.5 * (good + bad)
            if self._log_k(mid) >= log_thr:
                bad = mid
            else:
                good = mid
        return good


def peak_interval(
    state: StreamState, cfg: StreamConfig, alpha: float
) -> tuple[float, float]:
    """Capital-inversion confidence interval after replaying `state`.

    Pure function of the recorded observations: replays them through a
    fresh tracker so the interval reflects the intersection over every
    prefix. [0, 1] while no hypothesis has been rejected.
    """
    tracker = PeakIntervalTracker(cfg, alpha)
    for x in state.x:
        tracker.observe(float(x))
    return tracker.interval()


# ---------------------------------------------------------------------------
# Predictable-plugin Hoeffding interval


@dataclass(frozen=True)
class PrPlHState:
    """Accumulators for the predictable-plugin Hoeffding interval."""

    t: int = 0
    sum_lam: float = 0.0
    sum_lam_x: float = 0.0
    sum_lam_sq: float = 0.0
    lo: float = 0.0
    hi: float = 1.0
    empty: bool = False


def prplh_lambda(t: int, alpha: float) -> float:
    """Plugin bet min(sqrt(8 log(2/alpha) / (t log(t+1))), 1)."""
    return min(math.sqrt(8.0 * math.log(2.0 / alpha) / (t * math.log(t + 1.0))), 1.0)


def _intersect(lo: float, hi: float, new_lo: float, new_hi: float) -> tuple[float, float, bool]:
    out_lo = max(lo, min(1.0, max(0.0, new_lo)))
    out_hi = min(hi, max(0.0, min(1.0, new_hi)))
    if out_lo > out_hi:
        mid = 0.5 * (out_lo + out_hi)
        return mid, mid, True
    return out_lo, out_hi, False


def prplh_update(state: PrPlHState, x: float, t: int, alpha: float) -> PrPlHState:
    """Fold in observation number t; center sum(lam x)/sum(lam), radius
    (log(2/alpha) + sum(lam^2)/8) / sum(lam), clipped and intersected."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"observation {x!r} outside [0, 1]")
    if t != state.t + 1:
        raise ValueError(f"expected observation index {state.t + 1}, got {t}")
    lam = prplh_lambda(t, alpha)
    sum_lam = state.sum_lam + lam
    sum_lam_x = state.sum_lam_x + lam * x
    sum_lam_sq = state.sum_lam_sq + lam * lam
    center = sum_lam_x / sum_lam
    radius = (math.log(2.0 / alpha) + sum_lam_sq / 8.0) / sum_lam
    lo, hi, dead = _intersect(state.lo, state.hi, center - radius, center + radius)
    return PrPlHState(
        t=t,
        sum_lam=sum_lam,
        sum_lam_x=sum_lam_x,
        sum_lam_sq=sum_lam_sq,
        lo=lo,
        hi=hi,
        empty=state.empty or dead,
    )


# ---------------------------------------------------------------------------
# Empirical-Bernstein interval


@dataclass(frozen=True)
class EmpBernState:
    """Accumulators for the empirical-Bernstein interval.

    mu and var carry the prior-loaded running mean (1/2 + sum x)/(t+1)
    and variance (1/4 + sum (x_i - mu_i)^2)/(t+1) used by the plugin bet.
    """

    t: int = 0
    sum_x: float = 0.0
    sum_sq_dev: float = 0.0
    mu: float = 0.5
    var: float = 0.25
    sum_lam: float = 0.0
    sum_lam_x: float = 0.0
    sum_weighted_psi: float = 0.0
    lo: float = 0.0
    hi: float = 1.0
    empty: bool = False


def psi_e(lam: float) -> float:
    """(-log(1 - lam) - lam) / 4, the variance-process weight."""
    return (-math.log1p(-lam) - lam) / 4.0


def empbern_lambda(var_prev: float, t: int, alpha: float) -> float:
    """Plugin bet min(sqrt(2 log(2/alpha) / (var_prev t log(t+1))), 1/2)."""
    return min(
        math.sqrt(2.0 * math.log(2.0 / alpha) / (var_prev * t * math.log(t + 1.0))),
        0.5,
    )


def empbern_update(state: EmpBernState, x: float, t: int, alpha: float) -> EmpBernState:
    """Fold in observation number t and advance the mean/variance recursions."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"observation {x!r} outside [0, 1]")
    if t != state.t + 1:
        raise ValueError(f"expected observation index {state.t + 1}, got {t}")
    lam = empbern_lambda(state.var, t, alpha)
    v = 4.0 * (x - state.mu) ** 2
    sum_lam = state.sum_lam + lam
    sum_lam_x = state.sum_lam_x + lam * x
    sum_weighted_psi = state.sum_weighted_psi + v * psi_e(lam)
    center = sum_lam_x / sum_lam
    radius = (math.log(2.0 / alpha) + sum_weighted_psi) / sum_lam
    lo, hi, dead = _intersect(state.lo, state.hi, center - radius, center + radius)
    sum_x = state.sum_x + x
    mu_t = (0.5 + sum_x) / (t + 1.0)
    sum_sq_dev = state.sum_sq_dev + (x - mu_t) ** 2
    var_t = (0.25 + sum_sq_dev) / (t + 1.0)
    return EmpBernState(
        t=t,
        sum_x=sum_x,
        sum_sq_dev=sum_sq_dev,
        mu=mu_t,
        var=var_t,
        sum_lam=sum_lam,
        sum_lam_x=sum_lam_x,
        sum_weighted_psi=sum_weighted_psi,
        lo=lo,
        hi=hi,
        empty=state.empty or dead,
    )


# ---------------------------------------------------------------------------
# Hedged two-sided capital


def hedged_membership(
    history, m: float, theta: float = 0.5, alpha: float = 0.05
) -> bool:
    """True while the hedged capital at m has never crossed 1/alpha.

    Runs paired long/short capital processes with the empirical-
    Bernstein plugin bet (truncated at 1/2, so every factor stays at
    least 1/2) and takes the theta-weighted larger side.
    """
    if not 0.0 <= m <= 1.0:
        raise ValueError(f"hypothesis {m!r} outside [0, 1]")
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must be in (0, 1), got {theta}")
    kp = km = 1.0
    best = max(theta, 1.0 - theta)
    var_prev, sum_x, sum_sq_dev = 0.25, 0.0, 0.0
    for i, x in enumerate(history, start=1):
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"observation {x!r} outside [0, 1]")
        lam = empbern_lambda(var_prev, i, alpha)
        fp = 1.0 + lam * (x - m)
        fm = 1.0 - lam * (x - m)
        assert fp > 0.0 and fm > 0.0
        kp *= fp
        km *= fm
        best = max(best, theta * kp, (1.0 - theta) * km)
        sum_x += x
        mu_t = (0.5 + sum_x) / (i + 1.0)
        sum_sq_dev += (x - mu_t) ** 2
        var_prev = (0.25 + sum_sq_dev) / (i + 1.0)
    return best < 1.0 / alpha


class HedgedGridTracker:
    """Streams hedged capital pairs for every hypothesis on a fixed grid.

    Capital pairs are carried per grid point, so per-step cost is linear
    in the grid size. The confidence set is the set of grid points whose
    running-max hedged capital stays below 1/alpha.
    """

    def __init__(self, grid_size: int = 100, theta: float = 0.5, alpha: float = 0.05):
        if grid_size < 2:
            raise ValueError(f"grid needs at least 2 points, got {grid_size}")
        if not 0.0 < theta < 1.0:
            raise ValueError(f"theta must be in (0, 1), got {theta}")
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {alpha}")
        self.theta = theta
        self.alpha = alpha
        self.grid = [i / (grid_size - 1.0) for i in range(grid_size)]
        self.kp = [1.0] * grid_size
        self.km = [1.0] * grid_size
        base = max(theta, 1.0 - theta)
        self.runmax = [base] * grid_size
        self.t = 0
        self._mu = 0.5
        self._var = 0.25
        self._sum_x = 0.0
        self._sum_sq_dev = 0.0

    def observe(self, x: float) -> None:
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"observation {x!r} outside [0, 1]")
        self.t += 1
        lam = empbern_lambda(self._var, self.t, self.alpha)
        theta = self.theta
        grid, kp, km, runmax = self.grid, self.kp, self.km, self.runmax
        for i in range(len(grid)):
            d = lam * (x - grid[i])
            a = kp[i] * (1.0 + d)
            b = km[i] * (1.0 - d)
            kp[i] = a
            km[i] = b
            hedged = theta * a
            other = (1.0 - theta) * b
            if other > hedged:
                hedged = other
            if hedged > runmax[i]:
                runmax[i] = hedged
        self._sum_x += x
        mu_t = (0.5 + self._sum_x) / (self.t + 1.0)
        self._sum_sq_dev += (x - mu_t) ** 2
        self._var = (0.25 + self._sum_sq_dev) / (self.t + 1.0)
        self._mu = mu_t

    def members(self) -> list[float]:
        thr = 1.0 / self.alpha
        return [m for m, r in zip(self.grid, self.runmax) if r < thr]

    def interval(self) -> tuple[float, float]:
        """Hull of the surviving grid points; (nan, nan) when none survive."""
        thr = 1.0 / self.alpha
        lo = hi = None
        for i in range(len(self.grid)):
            if self.runmax[i] < thr:
                lo = self.grid[i]
                break
        for i in range(len(self.grid) - 1, -1, -1):
            if self.runmax[i] < thr:
                hi = self.grid[i]
                break
        if lo is None:
            return math.nan, math.nan
        return lo, hi


# ---------------------------------------------------------------------------
# Adaptive truncated bet


def agrapa_lambda_raw(mu_hat: float, var_hat: float, m: float, l: float = 1.0) -> float:
    """max(-l/(1-m), min(l/m, (mu_hat - m) / (var_hat + (mu_hat - m)^2)))."""
    if not 0.0 < m < 1.0:
        raise ValueError(f"hypothesis must be interior to (0, 1), got {m}")
    if not 0.0 < l <= 1.0:
        raise ValueError(f"truncation level must be in (0, 1], got {l}")
    raw = (mu_hat - m) / (var_hat + (mu_hat - m) ** 2)
    return max(-l / (1.0 - m), min(l / m, raw))


def agrapa_lambda(state: StreamState, m: float, l: float = 1.0) -> float:
    """Adaptive truncated bet for the next observation of `state`.

    Uses the prior-loaded running mean and empirical-Bernstein variance
    recursion over the recorded history.
    """
    mu, var, sum_x, sum_sq_dev = 0.5, 0.25, 0.0, 0.0
    for i, x in enumerate(state.x, start=1):
        sum_x += float(x)
        mu = (0.5 + sum_x) / (i + 1.0)
        sum_sq_dev += (float(x) - mu) ** 2
        var = (0.25 + sum_sq_dev) / (i + 1.0)
    return agrapa_lambda_raw(mu, var, m, l)


# ---------------------------------------------------------------------------
# Fixed-width exploration bounds


def base_bound_thr(n: int, mu_hat: float, alpha: float, w: int) -> tuple[float, float]:
    """Per-arm bound mu_hat +/- sqrt(log(4 W n^2 / alpha) / (2n)), clipped."""
    if n <= 0:
        return 0.0, 1.0
    radius = math.sqrt(math.log(4.0 * w * n * n / alpha) / (2.0 * n))
    return max(0.0, mu_hat - radius), min(1.0, mu_hat + radius)


def bai_exploration_radius(t: int, n: int, alpha: float, w: int) -> float:
    """sqrt(log((405.5 W t^1.1 / alpha) log(405.5 W t^1.1 / alpha)) / (2n))."""
    inner = 405.5 * w * t**1.1 / alpha
    return math.sqrt(math.log(inner * math.log(inner)) / (2.0 * n))


def base_bound_bai(
    t: int, n: int, mu_hat: float, alpha: float, w: int
) -> tuple[float, float]:
    """Per-arm exploration bound for best-arm stopping, clipped to [0, 1]."""
    if n <= 0:
        return 0.0, 1.0
    if t < 1:
        raise ValueError(f"time index must be >= 1, got {t}")
    radius = bai_exploration_radius(t, n, alpha, w)
    return max(0.0, mu_hat - radius), min(1.0, mu_hat + radius)
