"""Shared builders and independent oracles for the test suite.

The oracles reimplement the capital arithmetic directly from the product
formula (their own running means, their own grid evaluation) so tests
compare two separately written computations.
"""

from __future__ import annotations

import numpy as np
import pytest

from betstream.capital import StreamConfig, StreamState, observe
from betstream.harness.distributions import Bernoulli, Beta, PointContaminatedBeta
from betstream.joint import JointState, joint_observe


# ---------------------------------------------------------------------------
# independent capital oracles


def oracle_log_capital(xs, c, m):
    """Direct product-formula evaluation with its own prefix means."""
    total = 0.0
    running = 0.0
    for i, x in enumerate(xs):
        mu_prev = m if i == 0 else running / i
        total += np.log1p((mu_prev - m) * (x - m) / c)
        running += x
    return total


def oracle_log_capital_grid(xs, c, grid):
    """Same product formula vectorized over a hypothesis grid."""
    grid = np.asarray(grid, dtype=float)
    logk = np.zeros(grid.size)
    running = 0.0
    for i, x in enumerate(xs):
        if i > 0:
            mu_prev = running / i
            logk += np.log1p((mu_prev - grid) * (x - grid) / c)
        running += x
    return logk


def oracle_joint_capital(joint: JointState, m) -> float:
    """Average of per-arm product-formula capitals."""
    total = 0.0
    for a, stream in enumerate(joint.streams):
        total += np.exp(oracle_log_capital(list(stream.x), joint.cfg.c, float(m[a])))
    return total / joint.w


def oracle_arm_capital_grids(joint: JointState, grid):
    """Per-arm capital arrays over a shared hypothesis grid."""
    return [
        np.exp(oracle_log_capital_grid(list(s.x), joint.cfg.c, grid))
        for s in joint.streams
    ]


def oracle_global_min(joint: JointState, step=1e-4):
    """Coordinatewise grid argmins of the per-arm capitals.

    Arms with fewer than two observations have flat capital; every point
    minimizes, and the library's documented convention is 0.5.
    """
    grid = np.arange(0.0, 1.0 + step / 2, step)
    coords = []
    for s in joint.streams:
        if s.n <= 1:
            coords.append(0.5)
            continue
        k = oracle_log_capital_grid(list(s.x), joint.cfg.c, grid)
        coords.append(float(grid[int(np.argmin(k))]))
    return np.array(coords)


def oracle_min_threshold(joint, arm, xi, below, step=1e-3):
    """Region-restricted grid minimum of the averaged capital.

    The threshold itself joins the restricted grid so a minimum sitting
    exactly on the region boundary is representable.
    """
    grid = np.arange(0.0, 1.0 + step / 2, step)
    total = 0.0
    for a, stream in enumerate(joint.streams):
        pts = grid
        if a == arm:
            pts = grid[grid <= xi] if below else grid[grid >= xi]
            pts = np.append(pts, xi)
        k = np.exp(oracle_log_capital_grid(list(stream.x), joint.cfg.c, pts))
        total += k.min()
    return total / joint.w


def oracle_min_bai(joint, target, step=1e-3):
    """Grid minimum of the averaged capital over the cone where `target`
    is largest, via prefix minima of the other arms' capital arrays."""
    grid = np.arange(0.0, 1.0 + step / 2, step)
    ks = oracle_arm_capital_grids(joint, grid)
    total = ks[target].copy()
    for a, k in enumerate(ks):
        if a != target:
            total += np.minimum.accumulate(k)
    return float(total.min() / joint.w)


def _polytope_mesh_min(joint, constraints, grid0, grid1):
    k0 = np.exp(oracle_log_capital_grid(list(joint.streams[0].x), joint.cfg.c, grid0))
    k1 = np.exp(oracle_log_capital_grid(list(joint.streams[1].x), joint.cfg.c, grid1))
    e = (k0[:, None] + k1[None, :]) / 2.0
    feas = np.ones_like(e, dtype=bool)
    for coeffs, bound in constraints:
        feas &= (
            coeffs[0] * grid0[:, None] + coeffs[1] * grid1[None, :]
        ) <= bound + 1e-12
    if not feas.any():
        return None, None
    masked = np.where(feas, e, np.inf)
    i, j = np.unravel_index(int(np.argmin(masked)), masked.shape)
    return float(masked[i, j]), (float(grid0[i]), float(grid1[j]))


def oracle_min_polytope_2d(joint, constraints, step=1e-3):
    """Mesh minimum of the averaged capital over a 2-D polytope.

    A constraint boundary generally misses the coarse mesh, leaving a
    slope-limited gap, so the coarse pass is refined with a fine local
    mesh around its argmin.
    """
    assert joint.w == 2
    grid = np.arange(0.0, 1.0 + step / 2, step)
    value, point = _polytope_mesh_min(joint, constraints, grid, grid)
    assert value is not None
    span = 3.0 * step
    fine0 = np.clip(np.arange(point[0] - span, point[0] + span, 1e-5), 0.0, 1.0)
    fine1 = np.clip(np.arange(point[1] - span, point[1] + span, 1e-5), 0.0, 1.0)
    refined, _ = _polytope_mesh_min(joint, constraints, fine0, fine1)
    if refined is not None:
        value = min(value, refined)
    return value


# ---------------------------------------------------------------------------
# stream and experiment builders


def make_stream(xs) -> StreamState:
    s = StreamState.empty()
    for x in xs:
        s = observe(s, float(x))
    return s


def make_joint(arm_histories, c=0.26) -> JointState:
    cfg = StreamConfig(c=c)
    joint = JointState.fresh(len(arm_histories), cfg)
    order = []
    for a, xs in enumerate(arm_histories):
        order.extend((a, float(x)) for x in xs)
    for a, x in order:
        joint = joint_observe(joint, a, x)
    return joint


def random_joint(rng, w=None, t_max=50, c=0.26) -> JointState:
    w = w or int(rng.integers(1, 4))
    t = int(rng.integers(1, t_max + 1))
    cfg = StreamConfig(c=c)
    joint = JointState.fresh(w, cfg)
    for _ in range(t):
        joint = joint_observe(joint, int(rng.integers(w)), float(rng.random()))
    return joint


def reference_means():
    return [0.15 + 0.14 * a for a in (1, 2, 3, 4)]


def bernoulli_arms():
    return tuple(Bernoulli(mu) for mu in reference_means())


def beta_arms():
    return tuple(Beta(1.0, (1.0 - mu) / mu) for mu in reference_means())


def contaminated_arms():
    return (
        Beta(1.0, (1.0 - 0.29) / 0.29),
        Beta(1.0, (1.0 - 0.43) / 0.43),
        PointContaminatedBeta(1.0, 0.43 / 0.52, 1.0, 0.05),
        PointContaminatedBeta(1.0, 0.24 / 0.71, 0.0, 0.05),
    )


@pytest.fixture
def cfg():
    return StreamConfig()
