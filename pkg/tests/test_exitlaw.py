"""Exit-time law of the centered strip coordinate: series, moments, inverse."""
import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ndtr

from fvspine import exitlaw
from fvspine.constants import EXIT_MEAN, EXIT_VAR, STRIP_CENTER


def spectral_sf(t, terms=40):
    s = 0.0
    for j in range(terms):
        k = 2 * j + 1
        s += (-1) ** j * math.exp(-2.0 * k * k * t) / k
    return 4.0 / math.pi * s


def images_cdf(t, terms=12):
    s = 0.0
    for j in range(terms):
        k = 2 * j + 1
        s += (-1) ** j * (1.0 - ndtr(k * STRIP_CENTER / math.sqrt(t)))
    return 4.0 * s


@pytest.mark.parametrize("t", np.linspace(0.05, 0.6, 23))
def test_production_series_match_long_series_on_overlap(t):
    t = float(t)
    assert exitlaw.exit_sf(t) == pytest.approx(spectral_sf(t), abs=5e-15)
    assert exitlaw.exit_cdf(t) == pytest.approx(images_cdf(t), abs=5e-15)


def test_series_agree_at_switch_point():
    # exit_cdf uses the spectral branch at exactly T_SWITCH, images just below
    t = exitlaw.T_SWITCH
    assert exitlaw.exit_cdf(t) == pytest.approx(images_cdf(t), abs=5e-15)
    assert exitlaw.exit_cdf(t - 1e-16) == pytest.approx(1.0 - spectral_sf(t - 1e-16), abs=5e-15)


def test_edges():
    assert exitlaw.exit_cdf(0.0) == 0.0
    assert exitlaw.exit_sf(0.0) == 1.0
    assert exitlaw.exit_density(0.0) == 0.0
    assert exitlaw.exit_cdf(-1.0) == 0.0
    assert exitlaw.exit_sf(-1.0) == 1.0


def test_sf_cdf_complement():
    for t in np.geomspace(0.01, 3.0, 40):
        t = float(t)
        assert abs(exitlaw.exit_sf(t) + exitlaw.exit_cdf(t) - 1.0) < 1e-15


def test_mean_and_variance_match_closed_forms():
    mean, _ = quad(exitlaw.exit_sf, 0.0, 30.0, epsabs=1e-12, epsrel=1e-12,
                   points=[exitlaw.T_SWITCH], limit=200)
    assert mean == pytest.approx(EXIT_MEAN, abs=1e-9)
    m2, _ = quad(lambda t: 2.0 * t * exitlaw.exit_sf(t), 0.0, 30.0,
                 epsabs=1e-12, epsrel=1e-12, points=[exitlaw.T_SWITCH], limit=200)
    assert m2 - mean ** 2 == pytest.approx(EXIT_VAR, abs=1e-8)


@pytest.mark.parametrize("t1", [0.1, 0.25, 0.7])
def test_density_integrates_to_cdf(t1):
    val, _ = quad(exitlaw.exit_density, 0.0, t1, epsabs=1e-12, epsrel=1e-12, limit=200)
    assert val == pytest.approx(exitlaw.exit_cdf(t1), abs=1e-10)


@pytest.mark.parametrize("p", [1e-9, 1e-5, 0.1, 0.5, 0.9, 1.0 - 1e-5, 1.0 - 1e-9])
def test_quantile_round_trip(p):
    t = exitlaw.exit_quantile(p)
    if p > 0.9:
        assert exitlaw.exit_sf(t) == pytest.approx(1.0 - p, rel=1e-8, abs=1e-15)
    else:
        assert exitlaw.exit_cdf(t) == pytest.approx(p, abs=1e-11)


def test_quantile_monotone_and_median_scale():
    ps = np.linspace(0.01, 0.99, 50)
    ts = [exitlaw.exit_quantile(float(p)) for p in ps]
    assert all(a < b for a, b in zip(ts, ts[1:]))
    # median sits below the mean for this right-skewed law
    assert 0.3 < exitlaw.exit_quantile(0.5) < EXIT_MEAN


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 2.0])
def test_quantile_rejects_boundary(p):
    with pytest.raises(ValueError):
        exitlaw.exit_quantile(p)
