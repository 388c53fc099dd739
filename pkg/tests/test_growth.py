"""Closed-form growth analytics and their cross-module consistency."""

import math

import numpy as np
import pytest

from betstream.growth import (
    DegenerateGrowthError,
    GrowthQuery,
    IndeterminateRatioError,
    emit_growth_grid,
    growth_bernoulli,
    growth_ratio,
    kl_bernoulli,
    write_growth_grid,
)
from betstream.joint import JointState, empirical_e_power, joint_observe
from betstream.capital import StreamConfig


def oracle_growth(c, m, mu):
    return mu * math.log(1.0 + (mu - m) * (1.0 - m) / c) + (1.0 - mu) * math.log(
        1.0 - (mu - m) * m / c
    )


def test_growth_zero_at_truth():
    for c in (0.26, 0.3, 1.0):
        for m in (0.0, 0.3, 1.0):
            assert growth_bernoulli(GrowthQuery(c, m, m)) == 0.0


def test_growth_numeric_oracle():
    got = growth_bernoulli(GrowthQuery(0.26, 0.3, 0.5))
    expected = 0.5 * math.log(1.0 + 0.2 * 0.7 / 0.26) + 0.5 * math.log(
        1.0 - 0.2 * 0.3 / 0.26
    )
    assert got == pytest.approx(expected, abs=1e-15)
    assert got == pytest.approx(0.0842, abs=5e-5)
    assert got == pytest.approx(oracle_growth(0.26, 0.3, 0.5), abs=1e-15)


def test_growth_monotone_in_gap():
    # farther hypotheses grow faster at fixed truth
    g_far = growth_bernoulli(GrowthQuery(0.26, 0.1, 0.5))
    g_near = growth_bernoulli(GrowthQuery(0.26, 0.3, 0.5))
    assert g_far > g_near > 0.0


def test_growth_degenerate_at_quarter():
    with pytest.raises(DegenerateGrowthError):
        growth_bernoulli(GrowthQuery(0.25, 0.5, 0.0))


def test_kl_values():
    assert kl_bernoulli(0.3, 0.3) == 0.0
    expected = 0.5 * math.log(2.0) + 0.5 * math.log(2.0 / 3.0)
    assert kl_bernoulli(0.25, 0.5) == pytest.approx(expected, abs=1e-15)
    assert kl_bernoulli(0.25, 0.5) == pytest.approx(0.14384, abs=5e-6)
    assert kl_bernoulli(0.5, 0.0) == pytest.approx(math.log(2.0), abs=1e-15)
    assert kl_bernoulli(0.0, 0.5) == math.inf


def test_growth_ratio_quotient():
    q = GrowthQuery(0.26, 0.3, 0.5)
    assert growth_ratio(q) == pytest.approx(
        oracle_growth(0.26, 0.3, 0.5) / kl_bernoulli(0.3, 0.5), rel=1e-12
    )
    with pytest.raises(IndeterminateRatioError):
        growth_ratio(GrowthQuery(0.26, 0.5, 0.5))


def test_ratio_off_diagonal_in_unit_interval():
    points = np.linspace(0.0, 1.0, 101)[1:-1]
    for m in points[::7]:
        for mu in points[::7]:
            if m == mu:
                continue
            f = growth_ratio(GrowthQuery(0.26, float(m), float(mu)))
            assert 0.0 < f < 1.0


def test_ratio_rises_toward_truth():
    # fixing the truth, the ratio improves as the hypothesis approaches it
    values = [growth_ratio(GrowthQuery(0.26, m, 0.5)) for m in (0.1, 0.2, 0.3, 0.4)]
    assert values == sorted(values)
    values = [growth_ratio(GrowthQuery(0.26, m, 0.5)) for m in (0.9, 0.8, 0.7, 0.6)]
    assert values == sorted(values)


def test_grid_shape_and_diagonal():
    rows = emit_growth_grid(0.26, 3)
    assert len(rows) == 9
    for m, mu, g, f in rows:
        assert g >= 0.0
        if m == mu:
            assert f is None and g == 0.0
        else:
            assert f is not None and g > 0.0


def test_grid_monotone_in_c():
    rows_26 = emit_growth_grid(0.26, 9)
    rows_30 = emit_growth_grid(0.30, 9)
    for (m, mu, g26, _), (_, _, g30, _) in zip(rows_26, rows_30):
        if m == mu:
            assert g26 == g30 == 0.0
        else:
            assert g30 < g26


def test_write_growth_grid(tmp_path):
    path = tmp_path / "grid.csv"
    count = write_growth_grid(path, 0.26, 4)
    lines = path.read_text().splitlines()
    assert lines[0] == "m,mu,G,f"
    assert count == 16 and len(lines) == 17
    diag = [l for l in lines[1:] if l.endswith(",")]
    assert len(diag) == 4  # blank ratio on the diagonal


def test_worst_case_over_mixtures():
    # static-bet log factor under a mean-0.5 mixture dominates the
    # Bernoulli growth rate at the same truth
    rng = np.random.default_rng(71)
    c, m, mu = 0.26, 0.3, 0.5
    n = 100_000
    which = rng.integers(0, 3, n)
    draws = np.where(
        which == 0,
        rng.random(n),
        np.where(which == 1, rng.beta(1.0, 1.0, n), (rng.random(n) < 0.5).astype(float)),
    )
    logs = np.log1p((mu - m) * (draws - m) / c)
    mean = logs.mean()
    se = logs.std(ddof=1) / math.sqrt(n)
    assert mean >= growth_bernoulli(GrowthQuery(c, m, mu)) - 2.0 * se


def test_empirical_e_power_converges_to_growth():
    # plug-in drift: the realized rate is slightly below the limit early
    # on, so allow a small drift term beyond two standard errors
    rng = np.random.default_rng(72)
    c, m, mu, horizon, n_paths = 0.26, 0.3, 0.5, 4000, 32
    cfg = StreamConfig(c=c)
    rates = []
    for _ in range(n_paths):
        joint = JointState.fresh(1, cfg)
        for x in (rng.random(horizon) < mu).astype(float):
            joint = joint_observe(joint, 0, float(x))
        rates.append(empirical_e_power(joint, [m]))
    mean = float(np.mean(rates))
    se = float(np.std(rates, ddof=1) / math.sqrt(n_paths))
    target = growth_bernoulli(GrowthQuery(c, m, mu))
    assert abs(mean - target) <= 2.0 * se + 1e-3
