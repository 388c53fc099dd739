"""Arm distributions over [0, 1] with analytic means and seeded sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Bernoulli",
    "Beta",
    "PointContaminatedBeta",
    "Mixture",
    "ArmDistribution",
    "parse_distribution",
    "format_distribution",
]


@dataclass(frozen=True)
class Bernoulli:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"Bernoulli parameter must lie in [0, 1], got {self.p}")

    @property
    def mean(self) -> float:
        return self.p

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return (rng.random(size) < self.p).astype(float)


@dataclass(frozen=True)
class Beta:
    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0.0 or self.b <= 0.0:
            raise ValueError(f"Beta parameters must be positive, got {self.a}, {self.b}")

    @property
    def mean(self) -> float:
        return self.a / (self.a + self.b)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.beta(self.a, self.b, size)


@dataclass(frozen=True)
class PointContaminatedBeta:
    """Beta draw except for a point mass of `weight` at `atom` (0 or 1)."""

    a: float
    b: float
    atom: float
    weight: float

    def __post_init__(self):
        if self.a <= 0.0 or self.b <= 0.0:
            raise ValueError(f"Beta parameters must be positive, got {self.a}, {self.b}")
        if self.atom not in (0.0, 1.0):
            raise ValueError(f"atom must be 0 or 1, got {self.atom}")
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"atom weight must lie in [0, 1], got {self.weight}")

    @property
    def mean(self) -> float:
        beta_mean = self.a / (self.a + self.b)
        return (1.0 - self.weight) * beta_mean + self.weight * self.atom

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        out = rng.beta(self.a, self.b, size)
        hit = rng.random(size) < self.weight
        out[hit] = self.atom
        return out


@dataclass(frozen=True)
class Mixture:
    """Weighted mixture of other arm distributions; weights must sum to 1."""

    components: tuple[tuple[float, "ArmDistribution"], ...]

    def __post_init__(self):
        weights = [w for w, _ in self.components]
        if not weights:
            raise ValueError("mixture needs at least one component")
        if any(w < 0.0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
            raise ValueError(f"mixture weights must be nonnegative and sum to 1: {weights}")

    @property
    def mean(self) -> float:
        return sum(w * dist.mean for w, dist in self.components)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        weights = np.array([w for w, _ in self.components])
        idx = rng.choice(len(self.components), size=size, p=weights)
        out = np.empty(size)
        for i, (_, dist) in enumerate(self.components):
            mask = idx == i
            count = int(mask.sum())
            if count:
                out[mask] = dist.sample(rng, count)
        return out


ArmDistribution = Union[Bernoulli, Beta, PointContaminatedBeta, Mixture]


def parse_distribution(spec: str) -> ArmDistribution:
    """Parse an arm spec string.

    Forms: "bern:P", "beta:A,B", "unif", "cbeta:A,B,ATOM,WEIGHT", and
    "mix:W*SPEC+W*SPEC+..." where nested specs use the same grammar
    (without further nesting of mixtures).
    """
    spec = spec.strip()
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "bern":
            return Bernoulli(float(rest))
        if kind == "beta":
            a, b = rest.split(",")
            return Beta(float(a), float(b))
        if kind == "unif":
            return Beta(1.0, 1.0)
        if kind == "cbeta":
            a, b, atom, weight = rest.split(",")
            return PointContaminatedBeta(float(a), float(b), float(atom), float(weight))
        if kind == "mix":
            components = []
            for part in rest.split("+"):
                weight, _, inner = part.partition("*")
                components.append((float(weight), parse_distribution(inner)))
            return Mixture(tuple(components))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad arm spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown arm kind {kind!r} in spec {spec!r}")


def format_distribution(dist: ArmDistribution) -> str:
    if isinstance(dist, Bernoulli):
        return f"bern:{dist.p:.10g}"
    if isinstance(dist, Beta):
        return f"beta:{dist.a:.10g},{dist.b:.10g}"
    if isinstance(dist, PointContaminatedBeta):
        return f"cbeta:{dist.a:.10g},{dist.b:.10g},{dist.atom:.10g},{dist.weight:.10g}"
    if isinstance(dist, Mixture):
        return "mix:" + "+".join(
            f"{w:.10g}*{format_distribution(d)}" for w, d in dist.components
        )
    raise TypeError(f"not an arm distribution: {dist!r}")
