"""Estimation and test helpers: calibration and error paths."""

import numpy as np
import pytest
from scipy import stats as sps

from fvspine import stats
from fvspine.errors import InsufficientDataError


def test_mean_ci():
    rng = np.random.default_rng(1)
    x = rng.normal(3.0, 2.0, 10_000)
    rep = stats.mean_ci(x)
    assert abs(rep.estimate - 3.0) < 4 * rep.stderr
    assert rep.stderr == pytest.approx(2.0 / 100.0, rel=0.05)
    assert rep.n == 10_000
    with pytest.raises(InsufficientDataError):
        stats.mean_ci([1.0])
    with pytest.raises(ValueError):
        stats.mean_ci([1.0, np.inf])


def test_ks_one_sample():
    rng = np.random.default_rng(2)
    u = rng.random(5000)
    _, p_good = stats.ks_one_sample(u, sps.uniform.cdf)
    assert p_good > 0.01
    _, p_bad = stats.ks_one_sample(u ** 2, sps.uniform.cdf)
    assert p_bad < 1e-10
    # small samples route through the exact finite-n distribution
    _, p_small = stats.ks_one_sample(u[:30], sps.uniform.cdf)
    assert 0 <= p_small <= 1
    with pytest.raises(InsufficientDataError):
        stats.ks_one_sample(u[:5], sps.uniform.cdf)
    with pytest.raises(ValueError):
        stats.ks_one_sample(np.array([np.nan] * 20), sps.uniform.cdf)


def test_ks_two_sample():
    rng = np.random.default_rng(3)
    a, b = rng.normal(size=2000), rng.normal(size=2000)
    _, p = stats.ks_two_sample(a, b)
    assert p > 0.01
    _, p2 = stats.ks_two_sample(a, b + 0.5)
    assert p2 < 1e-10
    with pytest.raises(InsufficientDataError):
        stats.ks_two_sample(a[:3], b)


def test_exp_tail_fit_recovers_slope():
    t = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    s = 0.5 * np.exp(-1.02 * t)
    n = 1e7
    se = np.sqrt(s * (1 - s) / n)
    slope, slope_se, intercept = stats.exp_tail_fit(t, s, se)
    # exact points, so the weighted fit reproduces them to rounding
    assert slope == pytest.approx(-1.02, abs=1e-9)
    assert intercept == pytest.approx(np.log(0.5), abs=1e-9)
    assert slope_se > 0


def test_exp_tail_fit_drops_thin_cells():
    t = np.array([1.0, 2.0, 3.0, 4.0])
    s = np.exp(-t)
    se_ok = np.sqrt(s * (1 - s) / 1e6)
    # last cell has ~5 hits and must be excluded: slope then needs 3 of 4
    se = se_ok.copy()
    se[3] = np.sqrt(s[3] * (1 - s[3]) / (5.0 / s[3]))
    slope, _, _ = stats.exp_tail_fit(t, s, se)
    assert slope == pytest.approx(-1.0, abs=1e-6)
    with pytest.raises(InsufficientDataError):
        stats.exp_tail_fit(t[:3], np.zeros(3), se_ok[:3])
    with pytest.raises(ValueError):
        stats.exp_tail_fit(t, s, se_ok[:2])


def test_lil_statistic():
    t = np.array([1.0, 3.0, 30.0, 3000.0])
    y = np.ones_like(t)
    y[1:] = np.sqrt(2.0 * t[1:] * np.log(np.log(t[1:]))) * 0.8
    rep = stats.lil_statistic(t, y)
    assert rep.n_skipped == 1
    assert rep.times.size == 3
    assert np.allclose(rep.stats, 0.8)
    assert np.allclose(rep.running_max, 0.8)
    with pytest.raises(InsufficientDataError):
        stats.lil_statistic(np.array([1.0, 2.0]), np.array([1.0, 2.0]))


def test_drift_test():
    rng = np.random.default_rng(4)
    x = rng.normal(0.5, 1.0, 4000)
    z, p = stats.drift_test(x, 0.5)
    assert abs(z) < 4 and p > 1e-4
    z2, p2 = stats.drift_test(x, 0.0)
    assert z2 > 10 and p2 < 1e-10
    with pytest.raises(InsufficientDataError):
        stats.drift_test(x[:10], 0.0)


def test_runs_test():
    rng = np.random.default_rng(6)
    x = rng.normal(size=2000)
    _, p = stats.runs_test(x)
    assert p > 0.01
    # strict alternation around the median has far too many runs
    alt = np.tile([0.0, 1.0], 500)
    z, p_alt = stats.runs_test(alt)
    assert p_alt < 1e-10 and z > 0
    with pytest.raises(InsufficientDataError):
        stats.runs_test(x[:10])
    with pytest.raises(InsufficientDataError):
        stats.runs_test(np.ones(100))
