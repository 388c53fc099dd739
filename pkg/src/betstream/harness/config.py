"""Declarative experiment configuration and per-path results."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from betstream.harness.distributions import ArmDistribution, parse_distribution
from betstream.regions import Region, parse_region_spec

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "PathResult",
    "config_from_mapping",
    "config_from_file",
    "parse_config_text",
    "CONFIG_KEYS",
]

PROBLEMS = ("thr", "bai", "type1", "power1")
POLICIES = ("hdoc", "lucb", "uniform", "egreedy")
METHODS = ("peak", "base", "hedged", "union_peak")


class ConfigError(ValueError):
    """A configuration document is malformed; message names the key."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment exactly."""

    problem: str
    w: int
    arms: tuple[ArmDistribution, ...]
    alpha: float = 0.05
    c: float = 0.26
    policy: str = "uniform"
    method: str = "peak"
    horizon: int = 1000
    n_paths: int = 100
    seed: int = 0
    xi: Optional[float] = None
    hypothesis: Optional[tuple[float, ...]] = None
    region: Optional[Region] = None
    epsilon: float = 0.1
    hedged_grid: int = 100

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ConfigError(f"problem: unknown value {self.problem!r}")
        if self.w < 1:
            raise ConfigError(f"w: need at least one arm, got {self.w}")
        if len(self.arms) != self.w:
            raise ConfigError(
                f"arms: got {len(self.arms)} distributions for w={self.w}"
            )
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha: must be in (0, 1), got {self.alpha}")
        if self.c < 0.25:
            raise ConfigError(f"c: must be >= 1/4, got {self.c}")
        if self.policy not in POLICIES:
            raise ConfigError(f"policy: unknown value {self.policy!r}")
        base_method = self.method.split(":")[0]
        if base_method not in METHODS:
            raise ConfigError(f"method: unknown value {self.method!r}")
        if self.horizon < 0:
            raise ConfigError(f"horizon: must be >= 0, got {self.horizon}")
        if self.n_paths < 0:
            raise ConfigError(f"n_paths: must be >= 0, got {self.n_paths}")
        if self.problem == "thr":
            if self.xi is None:
                raise ConfigError("xi: required for problem=thr")
            if not 0.0 <= self.xi <= 1.0:
                raise ConfigError(f"xi: must lie in [0, 1], got {self.xi}")
        if self.hypothesis is not None and len(self.hypothesis) != self.w:
            raise ConfigError(
                f"hypothesis: got {len(self.hypothesis)} coordinates for w={self.w}"
            )
        if self.problem == "power1" and self.hypothesis is None:
            raise ConfigError("hypothesis: required for problem=power1")

    @property
    def true_means(self) -> tuple[float, ...]:
        return tuple(d.mean for d in self.arms)

    @property
    def hedged_grid_size(self) -> int:
        if self.method.startswith("hedged"):
            _, _, rest = self.method.partition(":")
            return int(rest) if rest else self.hedged_grid
        return self.hedged_grid


@dataclass
class PathResult:
    """One simulated path's stopping times and bookkeeping.

    taus are the ordered decision times: labeling times for threshold
    runs, region-rejection times for best-arm runs, the single rejection
    time (if any) for validity/power runs. labels carries a per-arm
    "above"/"below" tag for threshold runs, or the declared best arm.
    """

    path_id: int
    seed: int
    taus: tuple[int, ...]
    complete: bool
    correct: bool
    labels: tuple = ()
    anomalies: int = 0
    wall_ms: float = 0.0


# ---------------------------------------------------------------------------
# Flat key = value configuration documents

CONFIG_KEYS = {
    "problem": str,
    "w": int,
    "arms": str,
    "alpha": float,
    "c": float,
    "policy": str,
    "method": str,
    "horizon": int,
    "n_paths": int,
    "seed": int,
    "xi": float,
    "hypothesis": str,
    "region": str,
    "epsilon": float,
    "hedged_grid": int,
}


def parse_config_text(text: str) -> dict:
    """Parse `key = value` lines; '#' starts a comment; unknown keys fail."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{key}: unknown configuration key (line {lineno})")
        if key in values:
            raise ConfigError(f"{key}: duplicated (line {lineno})")
        try:
            values[key] = CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{key}: bad value {value!r} (line {lineno})") from exc
    return values


def config_from_mapping(values: dict) -> ExperimentConfig:
    """Build a validated config from a flat mapping of primitive values."""
    for key in values:
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{key}: unknown configuration key")
    for key in ("problem", "w", "arms"):
        if key not in values:
            raise ConfigError(f"{key}: required key missing")
    try:
        arms = tuple(
            parse_distribution(part) for part in str(values["arms"]).split("|")
        )
    except ValueError as exc:
        raise ConfigError(f"arms: {exc}") from exc
    hypothesis = None
    if values.get("hypothesis"):
        try:
            hypothesis = tuple(
                float(v) for v in str(values["hypothesis"]).split(",")
            )
        except ValueError as exc:
            raise ConfigError(f"hypothesis: {exc}") from exc
    region = None
    if values.get("region"):
        try:
            region = parse_region_spec(str(values["region"]))
        except ValueError as exc:
            raise ConfigError(f"region: {exc}") from exc
    kwargs = {
        key: values[key]
        for key in (
            "alpha",
            "c",
            "policy",
            "method",
            "horizon",
            "n_paths",
            "seed",
            "xi",
            "epsilon",
            "hedged_grid",
        )
        if key in values
    }
    return ExperimentConfig(
        problem=str(values["problem"]).lower(),
        w=int(values["w"]),
        arms=arms,
        hypothesis=hypothesis,
        region=region,
        **kwargs,
    )


def config_from_file(path, overrides: dict | None = None) -> ExperimentConfig:
    """Load a config document; non-None overrides take precedence."""
    with open(path) as fh:
        values = parse_config_text(fh.read())
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return config_from_mapping(values)
