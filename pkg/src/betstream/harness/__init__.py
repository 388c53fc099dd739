"""Experiment harness: distributions, configs, runners, benchmarks, replay."""

from betstream.harness.checkpoint import CheckpointError, checkpoint_load, checkpoint_save
from betstream.harness.config import ConfigError, ExperimentConfig, PathResult
from betstream.harness.distributions import (
    ArmDistribution,
    Bernoulli,
    Beta,
    Mixture,
    PointContaminatedBeta,
    parse_distribution,
)
from betstream.harness.experiments import run_bai, run_thr
from betstream.harness.montecarlo import power1_check, type1_mc
from betstream.harness.bench import bench_runtime
from betstream.harness.replay import ReplayParseError, replay_ingest

__all__ = [
    "ArmDistribution",
    "Bernoulli",
    "Beta",
    "PointContaminatedBeta",
    "Mixture",
    "parse_distribution",
    "ConfigError",
    "ExperimentConfig",
    "PathResult",
    "run_thr",
    "run_bai",
    "type1_mc",
    "power1_check",
    "bench_runtime",
    "ReplayParseError",
    "replay_ingest",
    "CheckpointError",
    "checkpoint_save",
    "checkpoint_load",
]
