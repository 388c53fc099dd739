"""Single-stream capital process: values, derivative, minimizer, invariants."""

import math

import numpy as np
import pytest

from betstream.capital import (
    DegenerateCapitalError,
    StreamConfig,
    StreamState,
    capital,
    dlog_capital,
    log_capital,
    log_capital_grid,
    log_capital_with_dlog,
    minimizer,
    observe,
)
from conftest import make_stream, oracle_log_capital, oracle_log_capital_grid


def test_observe_first_observation():
    s = observe(StreamState.empty(), 0.7)
    assert s.n == 1
    assert s.sum_x == 0.7
    assert s.records == [(None, 0.7)]


def test_observe_prefix_mean():
    s = make_stream([0.2, 0.4, 0.6])
    # third record carries the mean of the first two
    assert s.records[2][0] == pytest.approx(0.3, abs=1e-15)
    assert s.records[1][0] == pytest.approx(0.2, abs=1e-15)


def test_observe_rejects_out_of_range():
    with pytest.raises(ValueError, match="1.2"):
        observe(StreamState.empty(), 1.2)
    with pytest.raises(ValueError):
        observe(StreamState.empty(), -0.1)


def test_config_validation():
    with pytest.raises(ValueError):
        StreamConfig(c=0.2)
    with pytest.raises(ValueError):
        StreamConfig(gamma_floor=1e-6)
    with pytest.raises(ValueError):
        StreamConfig(gamma_floor=0.0)


def test_capital_empty_product(cfg):
    assert capital(StreamState.empty(), cfg, 0.3) == 1.0


def test_capital_single_observation_is_one(cfg):
    # first factor bets nothing regardless of the observation
    for x in (0.0, 0.33, 1.0):
        for m in (0.0, 0.5, 1.0):
            assert capital(make_stream([x]), cfg, m) == pytest.approx(1.0, abs=1e-15)


def test_capital_two_point_example(cfg):
    s = make_stream([1.0, 0.0])
    expected = 1.0 + (1.0 - 0.5) * (0.0 - 0.5) / 0.26
    assert capital(s, cfg, 0.5) == pytest.approx(expected, rel=1e-12)


def test_capital_rejects_bad_hypothesis(cfg):
    with pytest.raises(ValueError, match="outside"):
        capital(make_stream([0.5]), cfg, 1.5)


def test_log_capital_values(cfg):
    s = make_stream([1.0, 0.0])
    expected = math.log(1.0 + (1.0 - 0.5) * (0.0 - 0.5) / 0.26)
    assert log_capital(s, cfg, 0.5) == pytest.approx(expected, rel=1e-12)
    assert log_capital(make_stream([0.4]), cfg, 0.9) == 0.0


def test_log_capital_absorbs_at_zero_factor():
    # with c = 1/4 exactly, mu_prev=1, x=0, m=0.5 kills the factor
    cfg = StreamConfig(c=0.25)
    s = make_stream([1.0, 0.0])
    assert log_capital(s, cfg, 0.5) == -math.inf
    assert capital(s, cfg, 0.5) == 0.0


def test_dlog_no_hypothesis_dependence_before_two(cfg):
    assert dlog_capital(StreamState.empty(), cfg, 0.4) == 0.0
    assert dlog_capital(make_stream([0.8]), cfg, 0.4) == 0.0


def test_dlog_single_term_values(cfg):
    s = make_stream([1.0, 0.0])
    # stationarity of the single m-dependent factor at m = 0.5
    assert dlog_capital(s, cfg, 0.5) == pytest.approx(0.0, abs=1e-12)
    expected = (2 * 0.3 - 1.0 - 0.0) / (0.26 + (1.0 - 0.3) * (0.0 - 0.3))
    assert expected == pytest.approx(-8.0, rel=1e-12)
    assert dlog_capital(s, cfg, 0.3) == pytest.approx(expected, rel=1e-12)


def test_dlog_degenerate_denominator():
    cfg = StreamConfig(c=0.25)
    s = make_stream([1.0, 0.0])
    with pytest.raises(DegenerateCapitalError):
        dlog_capital(s, cfg, 0.5)


def test_minimizer_single_term(cfg):
    # solve 2m - mu_prev - x = 0 for history (1, 0)
    assert minimizer(make_stream([1.0, 0.0]), cfg) == pytest.approx(0.5, abs=1e-9)


def test_minimizer_flat_convention(cfg):
    assert minimizer(StreamState.empty(), cfg) == 0.5
    assert minimizer(make_stream([0.9]), cfg) == 0.5


def test_minimizer_matches_grid_argmin(cfg):
    rng = np.random.default_rng(3)
    for _ in range(5):
        xs = rng.random(10)
        s = make_stream(xs)
        grid = np.arange(0.0, 1.0 + 5e-5, 1e-4)
        oracle = grid[int(np.argmin(oracle_log_capital_grid(list(xs), 0.26, grid)))]
        assert abs(minimizer(s, cfg) - oracle) <= 1e-4


def test_minimizer_warm_bracket_agrees(cfg):
    rng = np.random.default_rng(4)
    xs = rng.random(25)
    s = make_stream(xs)
    cold = minimizer(s, cfg)
    warm = minimizer(s, cfg, bracket=(cold - 0.03, cold + 0.03))
    bogus = minimizer(s, cfg, bracket=(0.9, 0.99))  # discarded, does not bracket
    assert warm == pytest.approx(cold, abs=1e-9)
    assert bogus == pytest.approx(cold, abs=1e-9)


# ---------------------------------------------------------------------------
# invariants


def test_first_capital_always_one(cfg):
    rng = np.random.default_rng(5)
    for _ in range(20):
        s = make_stream([float(rng.random())])
        m = float(rng.random())
        assert capital(s, cfg, m) == pytest.approx(1.0, abs=1e-15)


def test_capital_nonnegative(cfg):
    rng = np.random.default_rng(6)
    for _ in range(10):
        s = make_stream(rng.random(40))
        for m in rng.random(10):
            assert capital(s, cfg, float(m)) >= 0.0


def test_martingale_identity_two_point():
    # exact unit expectation of the per-step factor under Bernoulli truth
    c = 0.26
    for mu in np.linspace(0.0, 1.0, 21):
        for mu_hat in np.linspace(0.0, 1.0, 21):
            up = 1.0 + (mu_hat - mu) * (1.0 - mu) / c
            down = 1.0 + (mu_hat - mu) * (0.0 - mu) / c
            assert mu * up + (1.0 - mu) * down == pytest.approx(1.0, abs=1e-12)


def test_strict_convexity_second_differences(cfg):
    rng = np.random.default_rng(7)
    for _ in range(4):
        xs = rng.random(int(rng.integers(2, 51)))
        s = make_stream(xs)
        h = 1e-3
        grid = np.arange(h, 1.0 - h / 2, h)
        k = np.exp(log_capital_grid(s, cfg, np.concatenate([grid - h, grid, grid + h])))
        n = grid.size
        second = k[2 * n :] - 2.0 * k[n : 2 * n] + k[:n]
        assert (second > 0).all()


def test_minimizer_containment(cfg):
    rng = np.random.default_rng(8)
    for _ in range(20):
        s = make_stream(rng.random(int(rng.integers(2, 30))))
        assert 0.0 <= minimizer(s, cfg) <= 1.0


def test_log_linear_consistency(cfg):
    rng = np.random.default_rng(9)
    s = make_stream(rng.random(30))
    for m in rng.random(10):
        lk = log_capital(s, cfg, float(m))
        assert math.exp(lk) == pytest.approx(capital(s, cfg, float(m)), rel=1e-10)


def test_log_capital_matches_oracle(cfg):
    rng = np.random.default_rng(10)
    xs = list(rng.random(35))
    s = make_stream(xs)
    for m in (0.0, 0.21, 0.5, 0.88, 1.0):
        assert log_capital(s, cfg, m) == pytest.approx(
            oracle_log_capital(xs, 0.26, m), rel=1e-11, abs=1e-11
        )


def test_grid_and_fused_evaluations_consistent(cfg):
    rng = np.random.default_rng(11)
    xs = list(rng.random(20))
    s = make_stream(xs)
    grid = np.linspace(0.0, 1.0, 17)
    vals = log_capital_grid(s, cfg, grid)
    for m, v in zip(grid, vals):
        assert v == pytest.approx(log_capital(s, cfg, float(m)), rel=1e-12, abs=1e-12)
        lk, dk = log_capital_with_dlog(s, cfg, float(m))
        assert lk == pytest.approx(v, rel=1e-12, abs=1e-12)
        assert dk == pytest.approx(dlog_capital(s, cfg, float(m)), rel=1e-12, abs=1e-12)
