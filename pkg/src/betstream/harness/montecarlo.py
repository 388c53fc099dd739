"""Monte-Carlo validity and power checks for fixed hypotheses.

Paths are simulated in vectorized blocks: per-path per-arm pull counts,
running sums, and log-capitals at the fixed hypothesis advance one step
at a time across all paths at once. For a region containing the truth,
exact region decisions are recovered lazily: the region minimum never
exceeds the pooled capital at the true mean, so only paths and times
where the point statistic crossed the threshold need the solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from betstream.capital import StreamConfig
from betstream.harness.config import ConfigError, ExperimentConfig
from betstream.harness.engine import RegionTestEngine
from betstream.regions import Region, contains

__all__ = [
    "MonteCarloReport",
    "fixed_hypothesis_rejection_times",
    "type1_mc",
    "power1_check",
]

BLOCK_PATHS = 4096


@dataclass(frozen=True)
class MonteCarloReport:
    """Ever-rejection rate with its binomial standard error."""

    n_paths: int
    horizon: int
    n_rejected: int
    rate: float
    se: float
    mean_rejection_time: float
    rejection_times: tuple[int, ...]

    @classmethod
    def from_times(cls, times: np.ndarray, horizon: int) -> "MonteCarloReport":
        n = times.size
        rejected = times[times >= 0]
        rate = rejected.size / n if n else 0.0
        se = math.sqrt(rate * (1.0 - rate) / n) if n else 0.0
        mean_t = float(rejected.mean()) if rejected.size else math.nan
        return cls(
            n_paths=n,
            horizon=horizon,
            n_rejected=int(rejected.size),
            rate=rate,
            se=se,
            mean_rejection_time=mean_t,
            rejection_times=tuple(int(v) for v in rejected),
        )


def _policy_actions(policy, rng, counts, sums, t, w, epsilon):
    """Arms for step t (1-based) for every path in the block."""
    n_paths = counts.shape[0]
    if policy == "uniform":
        return rng.integers(0, w, n_paths)
    if policy not in ("hdoc", "egreedy"):
        raise ConfigError(f"policy: {policy!r} not supported in Monte-Carlo runs")
    if t <= w:
        # round-robin initialization; every path has pulled 0..t-2 once
        return np.full(n_paths, t - 1, dtype=np.int64)
    mu_hat = sums / counts
    if policy == "hdoc":
        ucb = mu_hat + np.sqrt(math.log(t - 1) / (2.0 * counts))
        return np.argmax(ucb, axis=1)
    greedy = np.argmax(mu_hat, axis=1)
    explore = rng.random(n_paths) < epsilon
    return np.where(explore, rng.integers(0, w, n_paths), greedy)


def _block_times(
    config: ExperimentConfig, m: np.ndarray, rng, n_paths: int, collect: bool
):
    """Simulate one block; returns (times, kept (A, X) rows for crossers)."""
    w = config.w
    horizon = config.horizon
    log_thr = -math.log(config.alpha)
    c = config.c
    counts = np.zeros((n_paths, w))
    sums = np.zeros((n_paths, w))
    log_k = np.zeros((n_paths, w))
    times = np.full(n_paths, -1, dtype=np.int64)
    rows = np.arange(n_paths)
    if collect:
        a_hist = np.zeros((n_paths, horizon), dtype=np.int64)
        x_hist = np.zeros((n_paths, horizon))
    for t in range(1, horizon + 1):
        actions = _policy_actions(
            config.policy, rng, counts, sums, t, w, config.epsilon
        )
        x = np.empty(n_paths)
        for a in range(w):
            mask = actions == a
            k = int(mask.sum())
            if k:
                x[mask] = config.arms[a].sample(rng, k)
        if collect:
            a_hist[:, t - 1] = actions
            x_hist[:, t - 1] = x
        n_prev = counts[rows, actions]
        sum_prev = sums[rows, actions]
        m_a = m[actions]
        with np.errstate(invalid="ignore", divide="ignore"):
            mu_prev = np.where(n_prev > 0, sum_prev / np.maximum(n_prev, 1.0), 0.0)
        inc = np.where(
            n_prev > 0, np.log1p((mu_prev - m_a) * (x - m_a) / c), 0.0
        )
        log_k[rows, actions] += inc
        mx = log_k.max(axis=1)
        log_e = mx + np.log(np.exp(log_k - mx[:, None]).mean(axis=1))
        crossed_now = (log_e >= log_thr) & (times < 0)
        times[crossed_now] = t
        counts[rows, actions] += 1.0
        sums[rows, actions] += x
    kept = None
    if collect:
        keep = times >= 0
        kept = (a_hist[keep], x_hist[keep], times[keep])
    return times, kept


def fixed_hypothesis_rejection_times(
    config: ExperimentConfig, m, collect: bool = False
):
    """First crossing time per path (-1 when never), plus the (A, X)
    histories of the crossing paths when `collect` is set."""
    m = np.asarray(m, dtype=float)
    if m.size != config.w:
        raise ConfigError(f"hypothesis: got {m.size} coordinates for w={config.w}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(config.seed)))
    out = []
    kept_parts = []
    remaining = config.n_paths
    while remaining > 0:
        block = min(BLOCK_PATHS, remaining)
        times, kept = _block_times(config, m, rng, block, collect)
        out.append(times)
        if collect and kept is not None:
            kept_parts.append(kept)
        remaining -= block
    times = np.concatenate(out) if out else np.empty(0, dtype=np.int64)
    if not collect:
        return times, None
    if kept_parts:
        a_rows = np.concatenate([p[0] for p in kept_parts])
        x_rows = np.concatenate([p[1] for p in kept_parts])
        t_rows = np.concatenate([p[2] for p in kept_parts])
    else:
        a_rows = np.empty((0, config.horizon), dtype=np.int64)
        x_rows = np.empty((0, config.horizon))
        t_rows = np.empty(0, dtype=np.int64)
    return times, (a_rows, x_rows, t_rows)


def _region_rejection_time(
    config: ExperimentConfig, region: Region, a_row, x_row, first_cross: int
) -> int:
    """Exact first rejection time of the region test on one stored path.

    Evaluation may start at the first point-statistic crossing: before
    it, the region minimum is below threshold because the true mean is
    in the region.
    """
    engine = RegionTestEngine(
        config.w, StreamConfig(c=config.c), config.alpha, [region]
    )
    for t in range(1, config.horizon + 1):
        engine.observe(int(a_row[t - 1]), float(x_row[t - 1]))
        if t < first_cross:
            continue
        engine.step()
        decided = engine.decisions()[0]
        if decided is not None:
            return decided
    return -1


def type1_mc(config: ExperimentConfig) -> MonteCarloReport:
    """Ever-rejection rate for the true-mean hypothesis (or a region
    containing it); should stay at or below alpha plus noise."""
    if config.problem != "type1":
        raise ConfigError(f"problem: expected type1, got {config.problem}")
    truth = np.asarray(config.true_means)
    hypothesis = np.asarray(config.hypothesis) if config.hypothesis else truth
    region = config.region
    if region is None:
        times, _ = fixed_hypothesis_rejection_times(config, hypothesis)
        return MonteCarloReport.from_times(times, config.horizon)
    if not contains(region, truth):
        raise ConfigError("region: must contain the true mean vector for type1")
    times, kept = fixed_hypothesis_rejection_times(config, truth, collect=True)
    a_rows, x_rows, t_rows = kept
    region_times = np.full(times.size, -1, dtype=np.int64)
    crossers = np.flatnonzero(times >= 0)
    for i, path in enumerate(crossers):
        region_times[path] = _region_rejection_time(
            config, region, a_rows[i], x_rows[i], int(t_rows[i])
        )
    return MonteCarloReport.from_times(region_times, config.horizon)


def power1_check(config: ExperimentConfig) -> MonteCarloReport:
    """Ever-rejection rate for a misspecified hypothesis; the test has
    power one, so with enough horizon every path should reject."""
    if config.problem != "power1":
        raise ConfigError(f"problem: expected power1, got {config.problem}")
    times, _ = fixed_hypothesis_rejection_times(config, np.asarray(config.hypothesis))
    return MonteCarloReport.from_times(times, config.horizon)
