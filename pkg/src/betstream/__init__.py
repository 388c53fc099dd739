"""Anytime-valid sequential tests for means of bounded data streams.

The core object is a betting capital process per stream: a nonnegative
martingale under the hypothesized mean whose growth is evidence against
that mean. Evidence from several streams is pooled by averaging the
per-stream capitals, which keeps composite tests over convex regions of
the joint mean space tractable (coordinatewise minimization plus simple
projections instead of grid search).
"""

from betstream.capital import (
    DegenerateCapitalError,
    StreamConfig,
    StreamState,
    capital,
    dlog_capital,
    log_capital,
    minimizer,
    observe,
)
from betstream.joint import (
    JointState,
    TestTracker,
    empirical_e_power,
    joint_capital,
    joint_observe,
    log_joint_capital,
    step_point_test,
    union_test,
)
from betstream.regions import (
    BestArm,
    FeasibilityError,
    Point,
    Polytope,
    ThresholdAbove,
    ThresholdBelow,
    global_minimizer,
    minimize_bai,
    minimize_region,
    project_threshold,
    step_region_test,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateCapitalError",
    "StreamConfig",
    "StreamState",
    "observe",
    "capital",
    "log_capital",
    "dlog_capital",
    "minimizer",
    "JointState",
    "TestTracker",
    "joint_observe",
    "joint_capital",
    "log_joint_capital",
    "step_point_test",
    "union_test",
    "empirical_e_power",
    "Point",
    "ThresholdBelow",
    "ThresholdAbove",
    "BestArm",
    "Polytope",
    "FeasibilityError",
    "global_minimizer",
    "project_threshold",
    "minimize_bai",
    "minimize_region",
    "step_region_test",
    "__version__",
]
