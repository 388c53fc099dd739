"""Composite hypothesis regions in [0,1]^W and minimization of the pooled
capital over them.

The pooled capital is separable (a mean of per-arm functions of single
coordinates), so the unconstrained minimizer is found coordinatewise.
Threshold regions only clamp one coordinate. Best-arm cones tie the
violating coordinates at a common level q solving a pooled stationarity
equation. Generic linear-inequality polytopes get coordinate descent
with a grid cross-check when constraints couple coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from betstream.capital import (
    dlog_capital,
    log_capital,
    log_capital_grid,
    log_capital_with_dlog,
    minimizer,
)
from betstream.joint import JointState, TestTracker, crossed, logmeanexp

__all__ = [
    "FeasibilityError",
    "Point",
    "ThresholdBelow",
    "ThresholdAbove",
    "BestArm",
    "Polytope",
    "Region",
    "parse_region_spec",
    "region_label",
    "contains",
    "global_minimizer",
    "project_threshold",
    "minimize_bai",
    "minimize_region",
    "step_region_test",
    "bai_kkt_residual",
]

VALUE_TOL = 1e-8
COORD_TOL = 1e-6
BISECT_MAX_ITER = 200
FEASIBILITY_TOL = 1e-9
Q_FALLBACK_STEP = 1e-4


class FeasibilityError(ValueError):
    """The requested region is empty inside [0,1]^W."""


@dataclass(frozen=True)
class Point:
    """A single hypothesis vector."""

    m: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "m", tuple(float(v) for v in self.m))
        if any(not 0.0 <= v <= 1.0 for v in self.m):
            raise ValueError(f"point coordinates must lie in [0, 1]: {self.m}")


@dataclass(frozen=True)
class ThresholdBelow:
    """Means with coordinate `arm` below xi (closure: at or below)."""

    arm: int
    xi: float

    def __post_init__(self):
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError(f"threshold xi must lie in [0, 1], got {self.xi}")


@dataclass(frozen=True)
class ThresholdAbove:
    """Means with coordinate `arm` at or above xi."""

    arm: int
    xi: float

    def __post_init__(self):
        if not 0.0 <= self.xi <= 1.0:
            raise ValueError(f"threshold xi must lie in [0, 1], got {self.xi}")


@dataclass(frozen=True)
class BestArm:
    """Means for which `arm` is at least as large as every other arm."""

    arm: int


@dataclass(frozen=True)
class Polytope:
    """Intersection of linear inequalities coeffs . m <= bound with [0,1]^W.

    Must be nonempty inside the unit cube; checked on construction with
    an LP feasibility probe.
    """

    constraints: tuple[tuple[tuple[float, ...], float], ...]

    def __post_init__(self):
        norm = tuple(
            (tuple(float(c) for c in coeffs), float(bound))
            for coeffs, bound in self.constraints
        )
        object.__setattr__(self, "constraints", norm)
        if not norm:
            raise ValueError("polytope needs at least one constraint")
        w = len(norm[0][0])
        if any(len(coeffs) != w for coeffs, _ in norm):
            raise ValueError("constraint coefficient vectors have mixed lengths")
        if self.feasible_point() is None:
            raise FeasibilityError(f"polytope is empty inside [0,1]^{w}")

    @property
    def w(self) -> int:
        return len(self.constraints[0][0])

    def feasible_point(self) -> np.ndarray | None:
        from scipy.optimize import linprog

        a_ub = np.array([coeffs for coeffs, _ in self.constraints], dtype=float)
        b_ub = np.array([bound for _, bound in self.constraints], dtype=float)
        res = linprog(
            c=np.zeros(self.w),
            A_ub=a_ub,
            b_ub=b_ub,
            bounds=[(0.0, 1.0)] * self.w,
            method="highs",
        )
        return res.x if res.success else None


Region = Union[Point, ThresholdBelow, ThresholdAbove, BestArm, Polytope]


def parse_region_spec(spec: str) -> Region:
    """Parse a textual region spec.

    Forms: "point:0.5,0.3", "thr-below:ARM:XI", "thr-above:ARM:XI",
    "bai:ARM".
    """
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "point":
            return Point(tuple(float(v) for v in rest.split(",")))
        if kind == "thr-below":
            arm, xi = rest.split(":")
            return ThresholdBelow(int(arm), float(xi))
        if kind == "thr-above":
            arm, xi = rest.split(":")
            return ThresholdAbove(int(arm), float(xi))
        if kind == "bai":
            return BestArm(int(rest))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad region spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown region kind {kind!r} in spec {spec!r}")


def region_label(region: Region) -> str:
    if isinstance(region, Point):
        return "point:" + ",".join(f"{v:.10g}" for v in region.m)
    if isinstance(region, ThresholdBelow):
        return f"thr-below:{region.arm}:{region.xi:.10g}"
    if isinstance(region, ThresholdAbove):
        return f"thr-above:{region.arm}:{region.xi:.10g}"
    if isinstance(region, BestArm):
        return f"bai:{region.arm}"
    if isinstance(region, Polytope):
        parts = [
            ",".join(f"{c:.10g}" for c in coeffs) + "<=" + f"{b:.10g}"
            for coeffs, b in region.constraints
        ]
        return "polytope:" + ";".join(parts)
    raise TypeError(f"not a region: {region!r}")


def _check_arm(region_arm: int, w: int) -> None:
    if not 0 <= region_arm < w:
        raise IndexError(f"region arm {region_arm} out of range for {w} streams")


def contains(region: Region, m, w: int | None = None, tol: float = FEASIBILITY_TOL) -> bool:
    """Whether m lies in the region's closure (within tol)."""
    vec = np.asarray(m, dtype=float).reshape(-1)
    if np.any(vec < -tol) or np.any(vec > 1.0 + tol):
        return False
    if isinstance(region, Point):
        return np.allclose(vec, region.m, atol=tol)
    if isinstance(region, ThresholdBelow):
        return vec[region.arm] <= region.xi + tol
    if isinstance(region, ThresholdAbove):
        return vec[region.arm] >= region.xi - tol
    if isinstance(region, BestArm):
        return bool(np.all(vec <= vec[region.arm] + tol))
    if isinstance(region, Polytope):
        return all(
            float(np.dot(coeffs, vec)) <= bound + tol
            for coeffs, bound in region.constraints
        )
    raise TypeError(f"not a region: {region!r}")


def global_minimizer(joint: JointState, *, brackets=None) -> np.ndarray:
    """Coordinatewise minimizer of the pooled capital over [0,1]^W.

    The objective is a mean of per-arm functions of one coordinate each,
    so each coordinate solves its own one-dimensional problem; unpulled
    arms are flat and take the 0.5 convention.
    """
    out = np.empty(joint.w)
    for a, stream in enumerate(joint.streams):
        bracket = None if brackets is None else brackets[a]
        out[a] = minimizer(stream, joint.cfg, bracket=bracket)
    return out


def project_threshold(m_star, region: ThresholdBelow | ThresholdAbove) -> np.ndarray:
    """Clamp the region's coordinate of an unconstrained minimizer.

    For a separable convex objective this projection is the exact
    constrained minimizer over the threshold region.
    """
    vec = np.asarray(m_star, dtype=float).copy()
    _check_arm(region.arm, vec.size)
    if isinstance(region, ThresholdBelow):
        vec[region.arm] = min(vec[region.arm], region.xi)
    else:
        vec[region.arm] = max(vec[region.arm], region.xi)
    return vec


def _arm_logs_at(joint: JointState, coords: np.ndarray) -> np.ndarray:
    return np.array(
        [log_capital(s, joint.cfg, float(coords[a])) for a, s in enumerate(joint.streams)]
    )


def _pooled_residual(joint: JointState, mins: np.ndarray, target: int, q: float) -> float:
    """Scaled gradient of the pooled capital along the tied coordinates.

    Sums d/dq of each tied arm's capital at q, with the per-arm capital
    weights rescaled by the largest one so only the sign is meaningful.
    The tied set is the target plus every arm whose coordinatewise
    minimizer sits at or above q.
    """
    tied = [target] + [a for a in range(joint.w) if a != target and mins[a] >= q]
    pairs = [log_capital_with_dlog(joint.streams[a], joint.cfg, q) for a in tied]
    logs = np.array([p[0] for p in pairs])
    dlogs = np.array([p[1] for p in pairs])
    mx = logs.max()
    if mx == -math.inf:
        return 0.0
    return float((np.exp(logs - mx) * dlogs).sum())


def bai_kkt_residual(joint: JointState, target: int, q: float) -> float:
    """Unscaled pooled stationarity residual at tie level q.

    Near zero at the optimum when the best-arm constraints are active.
    """
    mins = global_minimizer(joint)
    tied = [target] + [a for a in range(joint.w) if a != target and mins[a] >= q]
    total = 0.0
    for a in tied:
        k = math.exp(log_capital(joint.streams[a], joint.cfg, q))
        total += k * dlog_capital(joint.streams[a], joint.cfg, q)
    return total


def _assemble_bai_point(mins: np.ndarray, target: int, q: float) -> np.ndarray:
    out = np.where(mins >= q, q, mins)
    out[target] = q
    return out


def _minimize_bai_log(
    joint: JointState,
    target: int,
    *,
    m_star: np.ndarray | None = None,
    q_bracket: tuple[float, float] | None = None,
    q_tol: float = 1e-12,
) -> tuple[np.ndarray, float]:
    _check_arm(target, joint.w)
    mins = global_minimizer(joint) if m_star is None else np.asarray(m_star, dtype=float)
    if joint.w == 1:
        return mins.copy(), log_capital(joint.streams[0], joint.cfg, float(mins[0]))
    others_max = max(float(mins[a]) for a in range(joint.w) if a != target)
    if mins[target] >= others_max:
        return mins.copy(), logmeanexp(_arm_logs_at(joint, mins))
    lo, hi = float(mins[target]), others_max
    if q_bracket is not None:
        blo = max(lo, q_bracket[0])
        bhi = min(hi, q_bracket[1])
        if blo < bhi and _pooled_residual(joint, mins, target, blo) <= 0.0 <= _pooled_residual(
            joint, mins, target, bhi
        ):
            lo, hi = blo, bhi
    r_lo = _pooled_residual(joint, mins, target, lo)
    r_hi = _pooled_residual(joint, mins, target, hi)
    if r_lo > 0.0 or r_hi < 0.0:
        # No sign change (degenerate ties); fall back to a fine grid on q.
        qs = np.arange(lo, hi + Q_FALLBACK_STEP, Q_FALLBACK_STEP)
        best_q, best_val = lo, math.inf
        for q in qs:
            point = _assemble_bai_point(mins, target, min(float(q), hi))
            val = logmeanexp(_arm_logs_at(joint, point))
            if val < best_val:
                best_q, best_val = float(q), val
        point = _assemble_bai_point(mins, target, best_q)
        return point, best_val
    for _ in range(BISECT_MAX_ITER):
        if hi - lo <= q_tol:
            break
        mid = 0.5 * (lo + hi)
        if _pooled_residual(joint, mins, target, mid) < 0.0:
            lo = mid
        else:
            hi = mid
    q = 0.5 * (lo + hi)
    point = _assemble_bai_point(mins, target, q)
    return point, logmeanexp(_arm_logs_at(joint, point))


def minimize_bai(joint: JointState, target: int) -> tuple[np.ndarray, float]:
    """Minimize the pooled capital over the cone where `target` is best.

    Returns the coordinatewise minimizer unchanged when it already lies
    in the cone; otherwise ties the violating coordinates (and the
    target) at the level q that zeroes the pooled stationarity sum.
    """
    point, logv = _minimize_bai_log(joint, target)
    return point, float(np.exp(logv))


def _coordinate_interval(
    poly: Polytope, coords: np.ndarray, a: int
) -> tuple[float, float]:
    lo, hi = 0.0, 1.0
    for coeffs, bound in poly.constraints:
        ca = coeffs[a]
        if ca == 0.0:
            continue
        rest = float(np.dot(coeffs, coords)) - ca * coords[a]
        limit = (bound - rest) / ca
        if ca > 0.0:
            hi = min(hi, limit)
        else:
            lo = max(lo, limit)
    if lo > hi:  # float slack on an active constraint
        mid = 0.5 * (lo + hi)
        lo = hi = min(1.0, max(0.0, mid))
    return lo, hi


def _mesh_minimum_log(
    joint: JointState, poly: Polytope, grids: list[np.ndarray]
) -> tuple[np.ndarray, float]:
    """Exact minimum of the pooled capital over a product grid ∩ polytope."""
    w = joint.w
    logks = [
        log_capital_grid(joint.streams[a], joint.cfg, grids[a]) for a in range(w)
    ]
    shape = [g.size for g in grids]
    log_w = math.log(w)
    total = None
    for a in range(w):
        view = logks[a].reshape([-1 if i == a else 1 for i in range(w)])
        arr = np.broadcast_to(view, shape)
        total = arr.copy() if total is None else np.logaddexp(total, arr)
    total = total - log_w
    mask = np.ones(shape, dtype=bool)
    for coeffs, bound in poly.constraints:
        acc = np.zeros(shape)
        for a in range(w):
            view = (coeffs[a] * grids[a]).reshape(
                [-1 if i == a else 1 for i in range(w)]
            )
            acc = acc + view
        mask &= acc <= bound + 1e-12
    if not mask.any():
        raise FeasibilityError("no feasible grid point in polytope")
    masked = np.where(mask, total, math.inf)
    idx = np.unravel_index(int(np.argmin(masked)), shape)
    point = np.array([grids[a][idx[a]] for a in range(w)])
    return point, float(masked[idx])


def _minimize_polytope_log(
    joint: JointState, poly: Polytope
) -> tuple[np.ndarray, float]:
    if poly.w != joint.w:
        raise ValueError(f"polytope is {poly.w}-dimensional, state has {joint.w} arms")
    mins = global_minimizer(joint)
    if contains(poly, mins, tol=1e-12):
        return mins, logmeanexp(_arm_logs_at(joint, mins))
    start = poly.feasible_point()
    if start is None:
        raise FeasibilityError("polytope is empty")
    coords = np.clip(start, 0.0, 1.0)
    prev_val = math.inf
    for _ in range(200):
        for a in range(joint.w):
            lo, hi = _coordinate_interval(poly, coords, a)
            coords[a] = min(max(float(mins[a]), lo), hi)
        val = logmeanexp(_arm_logs_at(joint, coords))
        if abs(prev_val - val) < VALUE_TOL:
            break
        prev_val = val
    best_point, best_val = coords.copy(), logmeanexp(_arm_logs_at(joint, coords))
    coupled = any(
        sum(1 for c in coeffs if c != 0.0) >= 2 for coeffs, _ in poly.constraints
    )
    if coupled and joint.w == 2:
        # the interior optimum is infeasible here, so the convex minimum
        # sits on the feasible region's boundary; walk every boundary
        # segment with an exact 1-D convex search
        point, val = _boundary_minimum_2d(joint, poly)
        if val < best_val:
            best_point, best_val = point, val
    elif coupled and joint.w == 3:
        # no exact boundary walk in 3-D; a coarse mesh plus local zooms
        # guards against descent stalling on tied constraints
        grids = [np.linspace(0.0, 1.0, 101) for _ in range(joint.w)]
        point, val = _mesh_minimum_log(joint, poly, grids)
        for step in (1e-3, 1e-4):
            fine = [
                np.clip(np.linspace(p - 15 * step, p + 15 * step, 31), 0.0, 1.0)
                for p in point
            ]
            try:
                point, val = _mesh_minimum_log(joint, poly, fine)
            except FeasibilityError:
                break
        if val < best_val:
            best_point, best_val = point, val
    return best_point, best_val


def _segment_interval(base, direction, poly, t_lo, t_hi):
    """Clip the parameter range of a 2-D line against polytope and box."""
    for coeffs, bound in poly.constraints:
        slope = coeffs[0] * direction[0] + coeffs[1] * direction[1]
        offset = coeffs[0] * base[0] + coeffs[1] * base[1]
        if abs(slope) < 1e-15:
            if offset > bound + 1e-12:
                return None
            continue
        limit = (bound - offset) / slope
        if slope > 0:
            t_hi = min(t_hi, limit)
        else:
            t_lo = max(t_lo, limit)
    for axis in (0, 1):
        d, b = direction[axis], base[axis]
        if abs(d) < 1e-15:
            if not -1e-12 <= b <= 1.0 + 1e-12:
                return None
            continue
        lo_lim, hi_lim = (0.0 - b) / d, (1.0 - b) / d
        if d < 0:
            lo_lim, hi_lim = hi_lim, lo_lim
        t_lo = max(t_lo, lo_lim)
        t_hi = min(t_hi, hi_lim)
    if t_lo > t_hi:
        return None
    return t_lo, t_hi


def _boundary_minimum_2d(joint: JointState, poly: Polytope) -> tuple[np.ndarray, float]:
    """Exact minimum over the boundary of a 2-D polytope-in-the-box.

    Along any boundary segment the pooled capital composes two strictly
    convex one-coordinate functions with an affine map, so each segment
    is solved by golden-section search.
    """
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0

    def value_at(p):
        return logmeanexp(_arm_logs_at(joint, np.clip(p, 0.0, 1.0)))

    def segment_min(base, direction, t_lo, t_hi):
        lo, hi = t_lo, t_hi
        a = hi - inv_phi * (hi - lo)
        b = lo + inv_phi * (hi - lo)
        fa = value_at(base + a * direction)
        fb = value_at(base + b * direction)
        for _ in range(80):
            if hi - lo <= 1e-10:
                break
            if fa <= fb:
                hi, b, fb = b, a, fa
                a = hi - inv_phi * (hi - lo)
                fa = value_at(base + a * direction)
            else:
                lo, a, fa = a, b, fb
                b = lo + inv_phi * (hi - lo)
                fb = value_at(base + b * direction)
        t = 0.5 * (lo + hi)
        best = base + t * direction
        candidates = [
            (value_at(base + u * direction), base + u * direction)
            for u in (t_lo, t, t_hi)
        ]
        return min(candidates, key=lambda c: c[0])

    lines = []
    for coeffs, bound in poly.constraints:
        norm = math.hypot(coeffs[0], coeffs[1])
        if norm < 1e-15:
            continue
        base = np.array([coeffs[0] * bound / norm**2, coeffs[1] * bound / norm**2])
        direction = np.array([-coeffs[1] / norm, coeffs[0] / norm])
        lines.append((base, direction, -4.0, 4.0))
    for axis, level in ((0, 0.0), (0, 1.0), (1, 0.0), (1, 1.0)):
        base = np.array([level, 0.0]) if axis == 0 else np.array([0.0, level])
        direction = np.array([0.0, 1.0]) if axis == 0 else np.array([1.0, 0.0])
        lines.append((base, direction, 0.0, 1.0))
    best_val, best_point = math.inf, None
    for base, direction, t_lo, t_hi in lines:
        interval = _segment_interval(base, direction, poly, t_lo, t_hi)
        if interval is None:
            continue
        val, point = segment_min(base, direction, interval[0], interval[1])
        if val < best_val:
            best_val, best_point = val, np.clip(point, 0.0, 1.0)
    if best_point is None:
        raise FeasibilityError("no feasible boundary segment found")
    return best_point, best_val


def _minimize_region_log(joint: JointState, region: Region) -> tuple[np.ndarray, float]:
    if isinstance(region, Point):
        vec = np.asarray(region.m, dtype=float)
        if vec.size != joint.w:
            raise ValueError(
                f"point has {vec.size} coordinates, state has {joint.w} arms"
            )
        return vec, logmeanexp(_arm_logs_at(joint, vec))
    if isinstance(region, (ThresholdBelow, ThresholdAbove)):
        _check_arm(region.arm, joint.w)
        proj = project_threshold(global_minimizer(joint), region)
        return proj, logmeanexp(_arm_logs_at(joint, proj))
    if isinstance(region, BestArm):
        return _minimize_bai_log(joint, region.arm)
    if isinstance(region, Polytope):
        return _minimize_polytope_log(joint, region)
    raise TypeError(f"not a region: {region!r}")


def minimize_region(joint: JointState, region: Region) -> tuple[np.ndarray, float]:
    """Minimizer and minimum of the pooled capital over a region's closure."""
    point, logv = _minimize_region_log(joint, region)
    return point, float(np.exp(logv))


def step_region_test(tracker: TestTracker, joint: JointState) -> bool:
    """Advance a composite-region test; True once rejected (sticky).

    Tracks the running maximum of the per-time region minimum of the
    pooled capital and rejects at the first crossing of 1/alpha. The
    region minimum lower-bounds the pooled capital at the true mean
    whenever the region contains it, so validity is inherited from the
    point test.
    """
    if tracker.decided_at is not None:
        return True
    if isinstance(tracker.region, Point) or not isinstance(
        tracker.region, (ThresholdBelow, ThresholdAbove, BestArm, Polytope)
    ):
        raise ValueError("step_region_test needs a non-point region; "
                         "use step_point_test for point hypotheses")
    _, logv = _minimize_region_log(joint, tracker.region)
    value = float(np.exp(logv))
    if value > tracker.running_extreme:
        tracker.running_extreme = value
    if crossed(tracker.running_extreme, tracker.alpha):
        tracker.decided_at = joint.t
        return True
    return False
