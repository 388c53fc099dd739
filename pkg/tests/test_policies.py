"""Sampling policies: selection rules, ties, initialization, distributions."""

import math

import numpy as np
import pytest
from scipy import stats as scipy_stats

from betstream.confseq import bai_exploration_radius
from betstream.policies import (
    ArmStats,
    epsilon_greedy_select,
    hdoc_select,
    lucb_select,
    uniform_select,
)


def _stats(counts, sums):
    s = ArmStats.fresh(len(counts))
    s.counts = np.array(counts, dtype=np.int64)
    s.sums = np.array(sums, dtype=float)
    s.t = int(sum(counts))
    return s


def test_hdoc_unpulled_first():
    s = _stats([2, 0, 1, 0], [1.0, 0.0, 0.5, 0.0])
    assert hdoc_select(s, [0, 1, 2, 3]) == 1
    assert hdoc_select(s, [0, 2, 3]) == 3


def test_hdoc_tie_lowest_index():
    s = _stats([10, 10], [5.0, 5.0])
    assert hdoc_select(s, [0, 1]) == 0


def test_hdoc_numeric_ucb():
    # equal pulls, equal bonus, higher mean wins
    s = _stats([100, 100], [50.0, 60.0])
    assert hdoc_select(s, [0, 1]) == 1
    bonus = math.sqrt(math.log(200) / 200.0)
    score0 = 0.5 + bonus
    score1 = 0.6 + bonus
    assert score1 > score0
    # smaller count buys a bigger bonus that can overcome the mean gap
    s = _stats([400, 4], [240.0, 2.0])
    bonus0 = math.sqrt(math.log(404) / 800.0)
    bonus1 = math.sqrt(math.log(404) / 8.0)
    assert 0.5 + bonus1 > 0.6 + bonus0
    assert hdoc_select(s, [0, 1]) == 1


def test_hdoc_empty_active():
    with pytest.raises(ValueError):
        hdoc_select(_stats([1], [0.5]), [])


def test_lucb_two_arms():
    s = _stats([5, 5], [4.0, 1.0])
    leader, challenger = lucb_select(s, 0.05)
    assert (leader, challenger) == (0, 1)


def test_lucb_requires_initialization():
    with pytest.raises(ValueError):
        lucb_select(_stats([3, 0], [1.0, 0.0]), 0.05)
    with pytest.raises(ValueError):
        lucb_select(_stats([3], [1.0]), 0.05)


def test_lucb_numeric_four_arms():
    counts = [40, 25, 10, 25]
    sums = [28.0, 15.0, 5.5, 14.0]
    s = _stats(counts, sums)
    t = s.t
    means = [sums[a] / counts[a] for a in range(4)]
    leader = int(np.argmax(means))
    scores = {
        a: means[a] + bai_exploration_radius(t, counts[a], 0.05, 4)
        for a in range(4)
        if a != leader
    }
    challenger = max(sorted(scores), key=lambda a: scores[a])
    assert lucb_select(s, 0.05) == (leader, challenger)


def test_uniform_single_arm():
    rng = np.random.default_rng(61)
    assert all(uniform_select(rng, 1) == 0 for _ in range(10))


def test_epsilon_one_is_uniform():
    # chi-square goodness of fit against the uniform law over 1e5 draws
    rng = np.random.default_rng(62)
    s = _stats([10, 10, 10, 10], [9.0, 2.0, 5.0, 5.0])
    draws = np.array([epsilon_greedy_select(s, rng, 1.0) for _ in range(100_000)])
    counts = np.bincount(draws, minlength=4)
    result = scipy_stats.chisquare(counts)
    assert result.pvalue > 0.001


def test_epsilon_zero_deterministic_greedy():
    rng = np.random.default_rng(63)
    s = _stats([10, 10, 10], [2.0, 9.0, 9.0])
    # ties break to the lowest index
    assert all(epsilon_greedy_select(s, rng, 0.0) == 1 for _ in range(20))


def test_epsilon_greedy_initializes_round_robin():
    rng = np.random.default_rng(64)
    s = ArmStats.fresh(3)
    picks = []
    for _ in range(3):
        a = epsilon_greedy_select(s, rng, 0.1)
        picks.append(a)
        s.update(a, 0.5)
    assert picks == [0, 1, 2]


def test_uniform_pull_counts_diverge():
    # every arm keeps getting pulled under the uniform policy
    for seed in (0, 1, 2):
        rng = np.random.default_rng(seed)
        w, horizon = 4, 10_000
        counts = np.zeros(w, dtype=int)
        for _ in range(horizon):
            counts[uniform_select(rng, w)] += 1
        assert (counts >= horizon / (2 * w)).all()


def test_arm_stats_validation():
    s = ArmStats.fresh(2)
    with pytest.raises(IndexError):
        s.update(2, 0.5)
    with pytest.raises(ValueError):
        s.update(0, 1.5)
    s.update(0, 0.25)
    assert s.mean(0) == 0.25
    with pytest.raises(ValueError):
        s.mean(1)
