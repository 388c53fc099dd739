"""Stopping-time experiments: threshold labeling and best-arm elimination.

Each path samples arms with the configured policy and, after every
observation, tests the open hypotheses with the configured method until
all are decided or the horizon runs out. Paths are reproducible from
the root seed (one spawned child per path) and independent, so they can
run in parallel worker processes.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from betstream.capital import StreamConfig
from betstream.confseq import (
    HedgedGridTracker,
    PeakIntervalTracker,
    base_bound_bai,
    base_bound_thr,
)
from betstream.harness.config import ConfigError, ExperimentConfig, PathResult
from betstream.harness.engine import RegionTestEngine
from betstream.policies import ArmStats, epsilon_greedy_select, hdoc_select, lucb_select, uniform_select
from betstream.regions import BestArm, ThresholdAbove, ThresholdBelow

__all__ = ["ExperimentSummary", "run_thr", "run_bai", "summarize_results", "path_seeds"]


@dataclass(frozen=True)
class ExperimentSummary:
    """Aggregates over complete paths; incomplete paths only counted."""

    n_paths: int
    n_complete: int
    n_correct: int
    mean_taus: tuple[float, ...]
    sd_taus: tuple[float, ...]
    se_taus: tuple[float, ...]
    anomalies: int


def path_seeds(seed: int, n_paths: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(n_paths)


def _select_arm(config: ExperimentConfig, stats: ArmStats, rng, active) -> int:
    if config.policy == "hdoc":
        return hdoc_select(stats, active)
    if config.policy == "uniform":
        return uniform_select(rng, config.w)
    if config.policy == "egreedy":
        return epsilon_greedy_select(stats, rng, config.epsilon)
    raise ConfigError(f"policy: {config.policy!r} not usable here")


def _sample_one(dist, rng) -> float:
    return float(dist.sample(rng, 1)[0])


# ---------------------------------------------------------------------------
# Per-arm interval state for the baseline methods


class _IntervalMethod:
    """Per-arm anytime intervals driving label/elimination decisions."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.kind = config.method.split(":")[0]
        w = config.w
        alpha = config.alpha
        cfg = StreamConfig(c=config.c)
        if self.kind == "union_peak":
            self.trackers = [PeakIntervalTracker(cfg, alpha / w) for _ in range(w)]
        elif self.kind == "hedged":
            grid = config.hedged_grid_size
            self.trackers = [
                HedgedGridTracker(grid, theta=0.5, alpha=alpha / w) for _ in range(w)
            ]
        elif self.kind == "base":
            self.intervals = [(0.0, 1.0)] * w
        else:
            raise ConfigError(f"method: {config.method!r} not an interval method")

    def observe(self, arm: int, x: float, stats: ArmStats, t: int) -> None:
        if self.kind == "base":
            n = int(stats.counts[arm])
            mu_hat = stats.mean(arm)
            if self.config.problem == "thr":
                lo, hi = base_bound_thr(n, mu_hat, self.config.alpha, self.config.w)
            else:
                lo, hi = base_bound_bai(t, n, mu_hat, self.config.alpha, self.config.w)
            prev_lo, prev_hi = self.intervals[arm]
            self.intervals[arm] = (max(prev_lo, lo), min(prev_hi, hi))
        else:
            self.trackers[arm].observe(x)

    def interval(self, arm: int) -> tuple[float, float]:
        if self.kind == "base":
            return self.intervals[arm]
        lo, hi = self.trackers[arm].interval()
        if math.isnan(lo):
            return 1.0, 0.0  # empty set: excludes everything
        return lo, hi


# ---------------------------------------------------------------------------
# Threshold labeling


def _run_thr_path(config: ExperimentConfig, path_id: int, child_seed) -> PathResult:
    start = time.perf_counter()
    rng = np.random.Generator(np.random.PCG64(child_seed))
    w, xi = config.w, config.xi
    stats = ArmStats.fresh(w)
    labels: dict[int, str] = {}
    taus: list[int] = []
    anomalies = 0
    use_regions = config.method == "peak"
    if use_regions:
        regions = []
        for a in range(w):
            regions.append(ThresholdBelow(a, xi))
            regions.append(ThresholdAbove(a, xi))
        engine = RegionTestEngine(
            w, StreamConfig(c=config.c), config.alpha, regions, xi=xi
        )
    else:
        intervals = _IntervalMethod(config)
    for t in range(1, config.horizon + 1):
        active = [a for a in range(w) if a not in labels]
        if not active:
            break
        arm = _select_arm(config, stats, rng, active)
        x = _sample_one(config.arms[arm], rng)
        stats.update(arm, x)
        newly: list[tuple[int, str]] = []
        if use_regions:
            engine.observe(arm, x)
            rejected = engine.step()
            hit: dict[int, list[str]] = {}
            for idx in rejected:
                a, side = divmod(idx, 2)
                # rejecting the below-region labels the arm above, and
                # conversely; possible only for unlabeled arms
                hit.setdefault(a, []).append("above" if side == 0 else "below")
            for a, sides in hit.items():
                if len(sides) == 2:
                    anomalies += 1  # both sides rejected at once (type-I event)
                newly.append((a, sides[0]))
        else:
            intervals.observe(arm, x, stats, t)
            for a in active:
                lo, hi = intervals.interval(a)
                if lo > xi:
                    newly.append((a, "above"))
                elif hi < xi:
                    newly.append((a, "below"))
        for a, side in newly:
            labels[a] = side
            taus.append(t)
            if use_regions:
                engine.deactivate(2 * a)
                engine.deactivate(2 * a + 1)
    complete = len(labels) == w
    correct = complete and all(
        (config.arms[a].mean > xi) == (side == "above") for a, side in labels.items()
    )
    return PathResult(
        path_id=path_id,
        seed=config.seed,
        taus=tuple(taus),
        complete=complete,
        correct=correct,
        labels=tuple(labels.get(a) for a in range(w)),
        anomalies=anomalies,
        wall_ms=(time.perf_counter() - start) * 1e3,
    )


# ---------------------------------------------------------------------------
# Best-arm elimination


def _run_bai_path(config: ExperimentConfig, path_id: int, child_seed) -> PathResult:
    start = time.perf_counter()
    rng = np.random.Generator(np.random.PCG64(child_seed))
    w = config.w
    stats = ArmStats.fresh(w)
    rejected_at: dict[int, int] = {}
    taus: list[int] = []
    use_regions = config.method == "peak"
    if use_regions:
        engine = RegionTestEngine(
            w, StreamConfig(c=config.c), config.alpha, [BestArm(a) for a in range(w)]
        )
    else:
        intervals = _IntervalMethod(config)
    if w == 1:
        return PathResult(
            path_id=path_id,
            seed=config.seed,
            taus=(0,),
            complete=True,
            correct=True,
            labels=(0,),
            wall_ms=(time.perf_counter() - start) * 1e3,
        )

    queue: list[int] = []

    def next_arms() -> list[int]:
        unpulled = [a for a in range(w) if stats.counts[a] == 0]
        if unpulled:
            return unpulled[:1]
        if config.policy == "lucb":
            leader, challenger = lucb_select(stats, config.alpha)
            return [leader, challenger]
        return [_select_arm(config, stats, rng, list(range(w)))]

    t = 0
    done = False
    while t < config.horizon and not done:
        if not queue:
            queue = next_arms()
        arm = queue.pop(0)
        t += 1
        x = _sample_one(config.arms[arm], rng)
        stats.update(arm, x)
        if use_regions:
            engine.observe(arm, x)
            for idx in engine.step():
                rejected_at[idx] = t
                taus.append(t)
        else:
            intervals.observe(arm, x, stats, t)
            if (stats.counts > 0).all():
                bounds = [intervals.interval(a) for a in range(w)]
                best_lo = max(lo for lo, _ in bounds)
                for a in range(w):
                    if a in rejected_at:
                        continue
                    if bounds[a][1] < best_lo:
                        rejected_at[a] = t
                        taus.append(t)
        if len(rejected_at) >= w - 1:
            done = True
    complete = len(rejected_at) >= w - 1
    declared = None
    if complete:
        survivors = [a for a in range(w) if a not in rejected_at]
        declared = survivors[0] if survivors else None
    truth = int(np.argmax([d.mean for d in config.arms]))
    correct = complete and declared == truth
    return PathResult(
        path_id=path_id,
        seed=config.seed,
        taus=tuple(taus),
        complete=complete,
        correct=correct,
        labels=(declared,),
        wall_ms=(time.perf_counter() - start) * 1e3,
    )


# ---------------------------------------------------------------------------
# Drivers


def _run_paths(config: ExperimentConfig, worker, threads: int) -> list[PathResult]:
    seeds = path_seeds(config.seed, config.n_paths)
    jobs = [(config, i, seeds[i]) for i in range(config.n_paths)]
    if threads <= 1:
        return [worker(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(_star_worker, [(worker, job) for job in jobs]))
    return sorted(results, key=lambda r: r.path_id)


def _star_worker(packed):
    worker, job = packed
    return worker(*job)


def summarize_results(results: list[PathResult], n_taus: int) -> ExperimentSummary:
    complete = [r for r in results if r.complete]
    taus = np.array([r.taus[:n_taus] for r in complete], dtype=float)
    if complete and taus.shape[1] == n_taus:
        mean = tuple(taus.mean(axis=0))
        sd = tuple(taus.std(axis=0, ddof=1)) if len(complete) > 1 else (0.0,) * n_taus
        se = tuple(s / math.sqrt(len(complete)) for s in sd)
    else:
        mean = sd = se = (math.nan,) * n_taus
    return ExperimentSummary(
        n_paths=len(results),
        n_complete=len(complete),
        n_correct=sum(1 for r in complete if r.correct),
        mean_taus=mean,
        sd_taus=sd,
        se_taus=se,
        anomalies=sum(r.anomalies for r in results),
    )


def run_thr(
    config: ExperimentConfig, threads: int = 1
) -> tuple[list[PathResult], ExperimentSummary]:
    """Label every arm above/below xi; taus are the ordered labeling times."""
    if config.problem != "thr":
        raise ConfigError(f"problem: expected thr, got {config.problem}")
    results = _run_paths(config, _run_thr_path, threads)
    return results, summarize_results(results, config.w)


def run_bai(
    config: ExperimentConfig, threads: int = 1
) -> tuple[list[PathResult], ExperimentSummary]:
    """Eliminate all best-arm regions but one; the survivor is declared."""
    if config.problem != "bai":
        raise ConfigError(f"problem: expected bai, got {config.problem}")
    results = _run_paths(config, _run_bai_path, threads)
    n_taus = max(config.w - 1, 1)
    return results, summarize_results(results, n_taus)
