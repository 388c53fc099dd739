"""Closed-form growth-rate analytics for Bernoulli alternatives.

For a hypothesis m and Bernoulli truth with mean mu, the expected
per-step log growth of the capital process with the limiting bet is

    G(c, m, mu) = mu log(1 + (mu - m)(1 - m)/c) + (1 - mu) log(1 - (mu - m) m / c),

which is nonnegative, zero exactly at m = mu, decreasing in c, and the
worst case over all distributions on [0, 1] with mean mu. The best
achievable rate in the simple-vs-simple Bernoulli problem is the
Bernoulli KL divergence; their ratio quantifies how much is lost to
nonparametric generality. Natural logarithms throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "DegenerateGrowthError",
    "IndeterminateRatioError",
    "GrowthQuery",
    "growth_bernoulli",
    "kl_bernoulli",
    "growth_ratio",
    "emit_growth_grid",
    "write_growth_grid",
    "GROWTH_GRID_HEADER",
]

GROWTH_GRID_HEADER = "m,mu,G,f"


class DegenerateGrowthError(ValueError):
    """A log argument hit zero (possible only at c = 1/4 exactly)."""


class IndeterminateRatioError(ValueError):
    """Growth ratio requested at m = mu, where it is 0/0."""


@dataclass(frozen=True)
class GrowthQuery:
    """Bet scale c >= 1/4, hypothesis m in [0,1], and truth mu in [0,1]."""

    c: float
    m: float
    mu: float

    def __post_init__(self):
        if not self.c >= 0.25:
            raise ValueError(f"bet scale c must be >= 1/4, got {self.c}")
        if not 0.0 <= self.m <= 1.0:
            raise ValueError(f"hypothesis m must lie in [0, 1], got {self.m}")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"truth mu must lie in [0, 1], got {self.mu}")


def growth_bernoulli(q: GrowthQuery) -> float:
    """Asymptotic per-step log growth against Bernoulli(mu) data."""
    gap = q.mu - q.m
    arg_one = 1.0 + gap * (1.0 - q.m) / q.c
    arg_zero = 1.0 - gap * q.m / q.c
    if arg_one <= 0.0 or arg_zero <= 0.0:
        raise DegenerateGrowthError(
            f"log argument vanished at c={q.c}, m={q.m}, mu={q.mu}"
        )
    return q.mu * math.log(arg_one) + (1.0 - q.mu) * math.log(arg_zero)


def kl_bernoulli(m: float, mu: float) -> float:
    """KL divergence of Bernoulli(mu) from Bernoulli(m); +inf at a boundary
    hypothesis that the truth does not share."""
    if not 0.0 <= m <= 1.0 or not 0.0 <= mu <= 1.0:
        raise ValueError(f"arguments must lie in [0, 1], got m={m}, mu={mu}")
    if m == mu:
        return 0.0
    if m in (0.0, 1.0):
        return math.inf
    total = 0.0
    if mu > 0.0:
        total += mu * math.log(mu / m)
    if mu < 1.0:
        total += (1.0 - mu) * math.log((1.0 - mu) / (1.0 - m))
    return total


def growth_ratio(q: GrowthQuery) -> float:
    """Achieved over best-achievable growth rate, in (0, 1) off the diagonal."""
    if q.m == q.mu:
        raise IndeterminateRatioError("growth ratio is 0/0 at m = mu")
    return growth_bernoulli(q) / kl_bernoulli(q.m, q.mu)


def emit_growth_grid(
    c: float, resolution: int
) -> list[tuple[float, float, float, float | None]]:
    """(m, mu, G, f) rows over the open-interior grid; f is None on the
    diagonal where the ratio is indeterminate."""
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    points = [i / (resolution + 1.0) for i in range(1, resolution + 1)]
    rows = []
    for m in points:
        for mu in points:
            query = GrowthQuery(c=c, m=m, mu=mu)
            g = growth_bernoulli(query)
            f = None if m == mu else growth_ratio(query)
            rows.append((m, mu, g, f))
    return rows


def write_growth_grid(path, c: float, resolution: int) -> int:
    """Write the grid as delimited text with header m,mu,G,f; returns the
    row count. Values carry 10 significant digits; f is blank on the
    diagonal."""
    rows = emit_growth_grid(c, resolution)
    with open(path, "w") as fh:
        fh.write(GROWTH_GRID_HEADER + "\n")
        for m, mu, g, f in rows:
            f_text = "" if f is None else f"{f:.10g}"
            fh.write(f"{m:.10g},{mu:.10g},{g:.10g},{f_text}\n")
    return len(rows)
