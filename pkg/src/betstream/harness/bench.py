"""Fixed-horizon runtime benchmark for best-arm testing methods.

Per path, one leader/challenger-sampled trajectory is pre-generated
from the path seed and shared across methods, so the timed section
covers only the testing work: stream updates plus a test of every
best-arm region at every other time step, with no stopping. Runs are
strictly serial to keep timings honest.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from betstream.capital import StreamConfig
from betstream.confseq import HedgedGridTracker
from betstream.harness.config import ConfigError, ExperimentConfig
from betstream.harness.engine import RegionTestEngine
from betstream.harness.experiments import path_seeds
from betstream.policies import ArmStats, lucb_select
from betstream.regions import BestArm

__all__ = ["BenchRow", "bench_runtime"]

TEST_EVERY = 2


@dataclass(frozen=True)
class BenchRow:
    method: str
    mean_s: float
    se_s: float
    n_paths: int


def _pregenerate(config: ExperimentConfig, child_seed):
    """One leader/challenger trajectory (A, X) of length horizon."""
    rng = np.random.Generator(np.random.PCG64(child_seed))
    w = config.w
    stats = ArmStats.fresh(w)
    actions = np.empty(config.horizon, dtype=np.int64)
    values = np.empty(config.horizon)
    queue: list[int] = []
    for t in range(config.horizon):
        if not queue:
            unpulled = [a for a in range(w) if stats.counts[a] == 0]
            if unpulled:
                queue = unpulled[:1]
            elif w >= 2:
                leader, challenger = lucb_select(stats, config.alpha)
                queue = [leader, challenger]
            else:
                queue = [0]
        arm = queue.pop(0)
        x = float(config.arms[arm].sample(rng, 1)[0])
        stats.update(arm, x)
        actions[t] = arm
        values[t] = x
    return actions, values


def _time_peak(config: ExperimentConfig, actions, values) -> float:
    start = time.perf_counter()
    engine = RegionTestEngine(
        config.w,
        StreamConfig(c=config.c),
        config.alpha,
        [BestArm(a) for a in range(config.w)],
    )
    for t in range(1, config.horizon + 1):
        engine.observe(int(actions[t - 1]), float(values[t - 1]))
        if t % TEST_EVERY == 0:
            engine.step()
    return time.perf_counter() - start


def _time_hedged(config: ExperimentConfig, grid: int, actions, values) -> float:
    w = config.w
    start = time.perf_counter()
    trackers = [
        HedgedGridTracker(grid, theta=0.5, alpha=config.alpha / w) for _ in range(w)
    ]
    rejected: set[int] = set()
    for t in range(1, config.horizon + 1):
        trackers[int(actions[t - 1])].observe(float(values[t - 1]))
        if t % TEST_EVERY == 0:
            bounds = [tr.interval() for tr in trackers]
            best_lo = max(
                (lo for lo, _ in bounds if not math.isnan(lo)), default=math.nan
            )
            if math.isnan(best_lo):
                continue
            for a in range(w):
                if a in rejected:
                    continue
                hi = bounds[a][1]
                if math.isnan(hi) or hi < best_lo:
                    rejected.add(a)
    return time.perf_counter() - start


def bench_runtime(config: ExperimentConfig, methods: list[str]) -> list[BenchRow]:
    """Mean and standard error of wall time per method over n_paths runs."""
    for method in methods:
        base = method.split(":")[0]
        if base not in ("peak", "hedged"):
            raise ConfigError(f"method: {method!r} not benchmarkable")
    if config.n_paths == 0:
        return []
    seeds = path_seeds(config.seed, config.n_paths)
    trajectories = [_pregenerate(config, s) for s in seeds]
    rows = []
    for method in methods:
        base, _, rest = method.partition(":")
        times = []
        for actions, values in trajectories:
            if base == "peak":
                times.append(_time_peak(config, actions, values))
            else:
                grid = int(rest) if rest else config.hedged_grid
                times.append(_time_hedged(config, grid, actions, values))
        arr = np.array(times)
        se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
        rows.append(
            BenchRow(method=method, mean_s=float(arr.mean()), se_s=se, n_paths=arr.size)
        )
    return rows
