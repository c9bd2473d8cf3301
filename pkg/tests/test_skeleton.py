"""Multiplicative skeleton walk: two step constructions and the running minimum."""

import numpy as np
import pytest
from scipy import stats as sps

from fvspine import skeleton
from fvspine.constants import EXIT_MEAN, LOG_SQRT2
from fvspine.errors import BudgetExceededError, InsufficientDataError
from fvspine.rng import RandomSource
from fvspine.skeleton import Method


def test_chain_shape_and_cumsum():
    rs = RandomSource(81)
    ch = skeleton.simulate_skeleton(rs, 500)
    assert ch.method is Method.XI_DIRECT
    assert ch.log_values.shape == (501,)
    assert ch.log_increments.shape == (500,)
    assert ch.log_values[0] == 0.0
    assert np.array_equal(ch.log_values[1:], np.cumsum(ch.log_increments))
    assert np.allclose(np.diff(ch.log_values), ch.log_increments)
    vals = ch.values
    assert vals[0] == 1.0
    assert np.all(vals > 0)
    assert rs.draws == 500


def test_renewal_method_draws():
    rs = RandomSource(82)
    ch = skeleton.simulate_skeleton(rs, 400, method=Method.RENEWAL_STEP)
    assert ch.method is Method.RENEWAL_STEP
    assert rs.draws == 1200
    assert ch.log_values.shape == (401,)


def test_methods_agree_in_law():
    n = 30_000
    a = skeleton.simulate_skeleton(RandomSource(83), n).log_increments
    b = skeleton.simulate_skeleton(RandomSource(84), n,
                                   method=Method.RENEWAL_STEP).log_increments
    res = sps.ks_2samp(a, b)
    assert res.pvalue > 0.01


@pytest.mark.parametrize("method", [Method.XI_DIRECT, Method.RENEWAL_STEP])
def test_increment_moments(method):
    n = 100_000
    incr = skeleton.simulate_skeleton(RandomSource(85), n,
                                      method=method).log_increments
    # mean log step is the drift, variance is the mean exit time
    se_mean = incr.std() / np.sqrt(n)
    assert abs(incr.mean() - LOG_SQRT2) < 4 * se_mean
    assert abs(incr.var() - EXIT_MEAN) < 0.02


def test_log_mean_drift_constant():
    assert skeleton.log_mean_drift() == LOG_SQRT2
    assert np.isclose(LOG_SQRT2, 0.5 * np.log(2.0))


def test_simulate_validates_n():
    with pytest.raises(ValueError):
        skeleton.simulate_skeleton(RandomSource(1), 0)


def test_min_log_single_and_determinism():
    m1 = skeleton.min_log_until_barrier(RandomSource(86, 4), 10.0)
    m2 = skeleton.min_log_until_barrier(RandomSource(86, 4), 10.0)
    assert m1 == m2
    assert m1 <= 0.0
    # a different stream gives a different batch of minima
    a = skeleton.min_log_batch(RandomSource(86, 4), 16, 10.0)
    b = skeleton.min_log_batch(RandomSource(86, 5), 16, 10.0)
    assert not np.array_equal(a, b)


def test_min_log_validates_barrier():
    with pytest.raises(ValueError):
        skeleton.min_log_until_barrier(RandomSource(1), 0.0)
    with pytest.raises(ValueError):
        skeleton.min_log_until_barrier(RandomSource(1), -2.0)


def test_min_log_budget_error():
    with pytest.raises(BudgetExceededError):
        skeleton.min_log_until_barrier(RandomSource(87), 40.0, max_steps=8)


def test_min_log_batch_counter_sync():
    rs = RandomSource(88)
    logs = skeleton.min_log_batch(rs, 300, 9.0)
    assert logs.shape == (300,)
    assert np.all(logs <= 0.0)
    # counter stays honest: a restored copy continues identically
    twin = RandomSource.from_state(rs.state())
    assert twin.uniform() == rs.uniform()


def test_tail_curve_reports():
    rs = RandomSource(89)
    t_grid = np.array([0.5, 1.0, 2.0])
    reports = skeleton.tail_curve(rs, 20_000, t_grid, barrier=14.0)
    assert len(reports) == 3
    probs = [r.estimate for r in reports]
    assert probs[0] > probs[1] > probs[2] > 0
    for r, t in zip(reports, t_grid):
        assert r.n == 20_000
        assert r.stderr > 0
        assert r.extras["t"] == t
        assert np.isclose(r.extras["c_hat"], np.exp(t) * r.estimate)
        assert r.extras["hits"] == round(r.estimate * 20_000)
        assert r.seed_manifest == {"seed": 89, "stream_id": 0}
    # prefactor is roughly flat once the barrier is far away
    c = [r.extras["c_hat"] for r in reports]
    assert 0.3 < min(c) and max(c) < 0.8


def test_tail_curve_validation():
    rs = RandomSource(90)
    with pytest.raises(ValueError):
        skeleton.tail_curve(rs, 100, np.array([]))
    with pytest.raises(ValueError):
        skeleton.tail_curve(rs, 100, np.array([0.5, -1.0]))
    with pytest.raises(ValueError):
        skeleton.tail_curve(rs, 100, np.array([2.0, 5.0]), barrier=6.0)
    with pytest.raises(InsufficientDataError):
        skeleton.tail_curve(rs, 0, np.array([1.0]))


def test_tail_curve_determinism():
    a = skeleton.tail_curve(RandomSource(91), 5000, np.array([1.0]))
    b = skeleton.tail_curve(RandomSource(91), 5000, np.array([1.0]))
    assert a[0].estimate == b[0].estimate
