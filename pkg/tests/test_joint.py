"""Multi-stream averaged capital, point tests, union comparator."""

import numpy as np
import pytest

from betstream.capital import StreamConfig, capital
from betstream.joint import (
    JointState,
    TestTracker,
    crossed,
    empirical_e_power,
    joint_capital,
    joint_observe,
    log_joint_capital,
    step_point_test,
    union_test,
)
from conftest import make_joint, oracle_joint_capital


def test_joint_observe_bookkeeping(cfg):
    j = JointState.fresh(2, cfg)
    j = joint_observe(j, 0, 0.4)
    assert j.pulls == (1, 0)
    assert j.t == 1
    assert j.streams[1].n == 0


def test_joint_observe_errors(cfg):
    j = JointState.fresh(4, cfg)
    with pytest.raises(IndexError):
        joint_observe(j, 5, 0.5)
    with pytest.raises(ValueError):
        joint_observe(j, 0, 1.5)


def test_unpulled_arm_capital_is_one(cfg):
    j = make_joint([[0.2, 0.9, 0.4], []])
    for m1 in (0.0, 0.5, 1.0):
        assert capital(j.streams[1], cfg, m1) == 1.0


def test_joint_capital_fresh_state(cfg):
    j = JointState.fresh(3, cfg)
    assert joint_capital(j, [0.1, 0.5, 0.9]) == 1.0


def test_joint_capital_half_pulled(cfg):
    j = make_joint([[1.0, 0.0], [1.0]])
    k0 = 1.0 + (1.0 - 0.5) * (0.0 - 0.5) / 0.26
    assert joint_capital(j, [0.5, 0.5]) == pytest.approx((k0 + 1.0) / 2.0, rel=1e-12)


def test_joint_capital_matches_oracle():
    rng = np.random.default_rng(21)
    j = make_joint([rng.random(15), rng.random(7), rng.random(22)])
    for _ in range(5):
        m = rng.random(3)
        assert joint_capital(j, m) == pytest.approx(
            oracle_joint_capital(j, m), rel=1e-10
        )


def test_joint_capital_validates_arguments(cfg):
    j = JointState.fresh(2, cfg)
    with pytest.raises(ValueError):
        joint_capital(j, [0.5])
    with pytest.raises(ValueError):
        joint_capital(j, [0.5, 1.5])


def test_crossing_threshold_boundary():
    assert not crossed(19.9, 0.05)
    assert crossed(20.0, 0.05)


def test_step_point_test_sticky():
    cfg = StreamConfig()
    j = JointState.fresh(1, cfg)
    tracker = TestTracker(region=(0.99,), alpha=0.2)
    assert step_point_test(tracker, j) is False
    # feed strong evidence against m = 0.99
    for _ in range(200):
        j = joint_observe(j, 0, 0.0)
        step_point_test(tracker, j)
    assert tracker.rejected
    decided = tracker.decided_at
    j = joint_observe(j, 0, 0.99)
    assert step_point_test(tracker, j) is True
    assert tracker.decided_at == decided


def test_running_extreme_nondecreasing(cfg):
    rng = np.random.default_rng(22)
    j = JointState.fresh(2, cfg)
    tracker = TestTracker(region=(0.5, 0.5), alpha=1e-6)
    prev = 0.0
    for _ in range(60):
        j = joint_observe(j, int(rng.integers(2)), float(rng.random()))
        step_point_test(tracker, j)
        assert tracker.running_extreme >= prev
        prev = tracker.running_extreme


def test_union_test_requires_all_arms(cfg):
    # W=4 at alpha 0.05: per-arm trackers at alpha/W, threshold 80
    w, alpha = 4, 0.05
    j = JointState.fresh(w, cfg)
    trackers = [TestTracker(region=(0.9,), alpha=alpha / w) for _ in range(w)]
    assert 1.0 / trackers[0].alpha == pytest.approx(80.0)
    for _ in range(300):
        j = joint_observe(j, 0, 0.0)  # only arm 0 gains evidence
        union_test(trackers, j)
    assert trackers[0].rejected
    assert not union_test(trackers, j)
    for arm in range(1, w):
        for _ in range(300):
            j = joint_observe(j, arm, 0.0)
            union_test(trackers, j)
    assert union_test(trackers, j)


def test_union_dominance_randomized(cfg):
    # whenever the union test has rejected, the averaged test rejected
    # at the same time or earlier
    rng = np.random.default_rng(23)
    for _ in range(25):
        w = int(rng.integers(2, 6))
        mus = rng.random(w)
        m = rng.random(w)
        j = JointState.fresh(w, cfg)
        union_trackers = [
            TestTracker(region=(float(m[a]),), alpha=0.05 / w) for a in range(w)
        ]
        point_tracker = TestTracker(region=m.copy(), alpha=0.05)
        union_at = point_at = None
        for t in range(1, 250):
            arm = int(rng.integers(w))
            j = joint_observe(j, arm, float(rng.random() < mus[arm]))
            if point_at is None and step_point_test(point_tracker, j):
                point_at = t
            if union_at is None and union_test(union_trackers, j):
                union_at = t
        if union_at is not None:
            assert point_at is not None and point_at <= union_at


def test_average_dominates_max_over_w(cfg):
    rng = np.random.default_rng(24)
    j = make_joint([rng.random(10), rng.random(10), rng.random(4)])
    for _ in range(10):
        m = rng.random(3)
        per_arm = [capital(j.streams[a], cfg, float(m[a])) for a in range(3)]
        assert joint_capital(j, m) >= max(per_arm) / 3.0 - 1e-12


def test_empirical_e_power_basics(cfg):
    j = JointState.fresh(1, cfg)
    with pytest.raises(ValueError):
        empirical_e_power(j, [0.5])
    j = joint_observe(j, 0, 0.7)
    assert empirical_e_power(j, [0.2]) == 0.0  # single factor is 1
    j = joint_observe(j, 0, 0.7)
    assert empirical_e_power(j, [0.2]) == pytest.approx(
        log_joint_capital(j, [0.2]) / 2.0
    )


def test_capital_depends_only_on_realized_sequence(cfg):
    # identical (arm, value) sequences give identical evidence however
    # the actions were produced
    rng = np.random.default_rng(25)
    seq = [(int(rng.integers(2)), float(rng.random())) for _ in range(40)]
    j1 = JointState.fresh(2, cfg)
    j2 = JointState.fresh(2, cfg)
    for a, x in seq:
        j1 = joint_observe(j1, a, x)
    for a, x in seq:
        j2 = joint_observe(j2, a, x)
    for m in rng.random((5, 2)):
        assert joint_capital(j1, m) == joint_capital(j2, m)
