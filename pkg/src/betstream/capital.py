"""Single-stream betting capital process for a bounded-mean hypothesis.

For observations x_1, ..., x_t in [0, 1] and hypothesized mean m, the
capital process is the running product of factors

    1 + (mu_prev_i - m) * (x_i - m) / c,

where mu_prev_i is the sample mean of the observations before x_i and
the very first factor uses the hypothesis itself in place of a mean, so
it is identically 1. With c >= 1/4 every factor is nonnegative for data
in [0, 1]; under the true mean the process is a nonnegative martingale,
and as a function of m it is strictly convex with a unique minimizer in
[0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DegenerateCapitalError",
    "StreamConfig",
    "StreamState",
    "observe",
    "capital",
    "log_capital",
    "log_capital_grid",
    "log_capital_with_dlog",
    "dlog_capital",
    "minimizer",
]

MINIMIZER_TOL = 1e-10
MINIMIZER_MAX_ITER = 200
FLAT_CAPITAL_POINT = 0.5


class DegenerateCapitalError(ValueError):
    """A per-step factor is nonpositive, so the process has degenerated."""


@dataclass(frozen=True)
class StreamConfig:
    """Bet scaling constant and the floor treated as a dead capital.

    c >= 1/4 keeps every factor nonnegative (strictly positive when
    c > 1/4). A factor at or below gamma_floor absorbs the log-capital
    to -inf: that hypothesis can never be rejected afterwards.
    """

    c: float = 0.26
    gamma_floor: float = 1e-300

    def __post_init__(self):
        if not self.c >= 0.25:
            raise ValueError(f"bet scale c must be >= 1/4, got {self.c}")
        if not (0.0 < self.gamma_floor < 1e-12):
            raise ValueError(
                f"gamma_floor must be in (0, 1e-12), got {self.gamma_floor}"
            )
        # the smallest possible factor is 1 - 1/(4c); when it clears the
        # floor, no data can kill the process and the checks are skipped
        object.__setattr__(
            self, "floor_reachable", 1.0 - 1.0 / (4.0 * self.c) <= self.gamma_floor
        )


@dataclass(frozen=True, eq=False)
class StreamState:
    """Observation history with the prefix mean stored for each point.

    mu_prev[i] is the sample mean of observations 0..i-1. The first
    entry is NaN, a sentinel meaning "the hypothesis itself", which
    makes the first capital factor identically 1. States are never
    mutated after construction; `observe` returns a new state.
    """

    n: int
    sum_x: float
    mu_prev: np.ndarray
    x: np.ndarray

    @classmethod
    def empty(cls) -> "StreamState":
        return cls(0, 0.0, np.empty(0), np.empty(0))

    @property
    def mean(self) -> float:
        if self.n == 0:
            raise ValueError("mean of an empty stream")
        return self.sum_x / self.n

    @property
    def records(self) -> list[tuple[float | None, float]]:
        """(mu_prev, x) pairs; mu_prev is None for the first observation."""
        return [
            (None if i == 0 else float(self.mu_prev[i]), float(self.x[i]))
            for i in range(self.n)
        ]


def observe(state: StreamState, x: float) -> StreamState:
    """Append one observation, recording the pre-observation sample mean."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"observation {x!r} outside [0, 1]")
    prev = math.nan if state.n == 0 else state.sum_x / state.n
    return StreamState(
        n=state.n + 1,
        sum_x=state.sum_x + x,
        mu_prev=np.append(state.mu_prev, prev),
        x=np.append(state.x, float(x)),
    )


def _check_hypothesis(m: float) -> None:
    if not 0.0 <= m <= 1.0:
        raise ValueError(f"hypothesis {m!r} outside [0, 1]")


def log_capital(state: StreamState, cfg: StreamConfig, m: float) -> float:
    """Log of the capital process at hypothesis m.

    Returns -inf once any factor falls to cfg.gamma_floor or below;
    from then on the hypothesis cannot be rejected at any time.
    """
    _check_hypothesis(m)
    if state.n == 0:
        return 0.0
    mu = np.where(np.isnan(state.mu_prev), m, state.mu_prev)
    w = (mu - m) * (state.x - m) / cfg.c
    if cfg.floor_reachable and np.any(w <= cfg.gamma_floor - 1.0):
        return -math.inf
    return float(np.log1p(w).sum())


def log_capital_grid(state: StreamState, cfg: StreamConfig, ms: np.ndarray) -> np.ndarray:
    """log_capital evaluated at many hypotheses at once (one pass each)."""
    ms = np.asarray(ms, dtype=float)
    if ms.size and (ms.min() < 0.0 or ms.max() > 1.0):
        raise ValueError("hypothesis grid must lie in [0, 1]")
    if state.n == 0:
        return np.zeros(ms.shape)
    mu = np.where(np.isnan(state.mu_prev), 0.0, state.mu_prev)[:, None]
    x = state.x[:, None]
    grid = ms[None, :]
    w = (mu - grid) * (x - grid) / cfg.c
    w[0, :] = 0.0  # first factor is identically 1
    if not cfg.floor_reachable:
        return np.log1p(w).sum(axis=0)
    dead = (w <= cfg.gamma_floor - 1.0).any(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.log1p(np.maximum(w, -1.0)).sum(axis=0)
    out[dead] = -math.inf
    return out


def capital(state: StreamState, cfg: StreamConfig, m: float) -> float:
    """Capital process value; exp of log_capital for numerical stability."""
    return float(np.exp(log_capital(state, cfg, m)))


def log_capital_with_dlog(
    state: StreamState, cfg: StreamConfig, m: float
) -> tuple[float, float]:
    """log_capital and its derivative in one pass over the records."""
    _check_hypothesis(m)
    if state.n == 0:
        return 0.0, 0.0
    mu = np.where(np.isnan(state.mu_prev), m, state.mu_prev)
    prod = (mu - m) * (state.x - m)
    w = prod / cfg.c
    if cfg.floor_reachable and np.any(w <= cfg.gamma_floor - 1.0):
        return -math.inf, 0.0
    logk = float(np.log1p(w).sum())
    if state.n <= 1:
        return logk, 0.0
    denom = cfg.c + prod[1:]
    if cfg.floor_reachable and np.any(denom <= 0.0):
        raise DegenerateCapitalError(
            f"nonpositive capital factor at m={m}; derivative undefined"
        )
    dlog = float(((2.0 * m - state.mu_prev[1:] - state.x[1:]) / denom).sum())
    return logk, dlog


def dlog_capital(state: StreamState, cfg: StreamConfig, m: float) -> float:
    """Derivative of log_capital in m.

    Sum over observations of (2m - mu_prev - x) / (c + (mu_prev - m)(x - m));
    the first observation contributes 0 because its factor is constant.
    """
    _check_hypothesis(m)
    if state.n <= 1:
        return 0.0
    mu = state.mu_prev[1:]
    x = state.x[1:]
    denom = cfg.c + (mu - m) * (x - m)
    if cfg.floor_reachable and np.any(denom <= 0.0):
        raise DegenerateCapitalError(
            f"nonpositive capital factor at m={m}; derivative undefined"
        )
    return float(((2.0 * m - mu - x) / denom).sum())


def minimizer(
    state: StreamState,
    cfg: StreamConfig,
    *,
    bracket: tuple[float, float] | None = None,
    tol: float = MINIMIZER_TOL,
) -> float:
    """Unique minimizer of the capital process over [0, 1].

    Bisection on the derivative sign, which changes exactly once.
    Returns the boundary point when the derivative does not change sign,
    and 0.5 by convention when the process is flat (n <= 1). `bracket`
    optionally narrows the initial interval when the caller knows the
    root is nearby; it is discarded if it does not actually bracket.
    """
    if state.n <= 1:
        return FLAT_CAPITAL_POINT
    lo, hi = 0.0, 1.0
    if bracket is not None:
        blo = max(0.0, bracket[0])
        bhi = min(1.0, bracket[1])
        if blo < bhi and dlog_capital(state, cfg, blo) < 0.0 < dlog_capital(state, cfg, bhi):
            lo, hi = blo, bhi
    if lo == 0.0 and hi == 1.0:
        if dlog_capital(state, cfg, 0.0) >= 0.0:
            return 0.0
        if dlog_capital(state, cfg, 1.0) <= 0.0:
            return 1.0
    for _ in range(MINIMIZER_MAX_ITER):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if dlog_capital(state, cfg, mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
