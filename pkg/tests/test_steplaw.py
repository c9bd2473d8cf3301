"""Analytic step-factor law against frozen quadrature values and identities."""
import math

import numpy as np
import pytest

from fvspine import steplaw
from fvspine.errors import DivergentIntegralError

SQRT2 = math.sqrt(2.0)
LOG_SQRT2 = 0.5 * math.log(2.0)

# quadrature ground truth, frozen before the samplers were written
CDF_AT_1 = 0.2951672353008665
NEG_MOMENT = {0.5: 0.910179721117, 1.0: 1.0, 1.5: 1.553773974027, 1.9: 6.597481874025}
LOG_SECOND_MOMENT = 0.736963528547635  # = (pi/4)^2 + (ln sqrt2)^2


def test_density_nonnegative_and_zero_left_of_origin():
    for y in [-1.0, 0.0]:
        assert steplaw.xi_density(y) == 0.0
    ys = np.linspace(1e-6, 50.0, 400)
    assert all(steplaw.xi_density(float(y)) > 0.0 for y in ys)


def test_density_integrates_to_one():
    assert steplaw.xi_neg_moment(0.0) == pytest.approx(1.0, abs=1e-10)


def test_cdf_frozen_value_and_median():
    assert steplaw.xi_cdf(1.0) == pytest.approx(CDF_AT_1, abs=1e-14)
    # arctan(sqrt2 - 1) = pi/8 and arctan(sqrt2 + 1) = 3pi/8, so F(sqrt2) = 1/2
    assert steplaw.xi_cdf(SQRT2) == pytest.approx(0.5, abs=1e-15)
    assert steplaw.xi_quantile(0.5) == pytest.approx(SQRT2, abs=1e-11)


def test_cdf_telescopes_to_single_arctan():
    # arctan(y-1) - arctan(y+1) + pi/2 == arctan(y^2/2): same derivative,
    # same value at 0; this is the cancellation-free form the tails invert
    for y in np.geomspace(1e-5, 100.0, 80):
        y = float(y)
        assert steplaw.xi_cdf(y) == pytest.approx(
            (2.0 / math.pi) * math.atan(0.5 * y * y), abs=2e-16, rel=1e-12)


def test_survival_complements_cdf():
    for y in np.geomspace(0.05, 40.0, 60):
        y = float(y)
        assert steplaw.xi_survival(y) == pytest.approx(1.0 - steplaw.xi_cdf(y), abs=1e-13)


def test_cdf_matches_density_by_quadrature():
    from scipy.integrate import quad
    for y in [0.3, 1.0, 2.5]:
        val, _ = quad(steplaw.xi_density, 0.0, y, epsabs=1e-12, epsrel=1e-12)
        assert val == pytest.approx(steplaw.xi_cdf(y), abs=1e-10)


@pytest.mark.parametrize("p", [1e-10, 1e-6, 0.05, CDF_AT_1, 0.5, 0.9,
                               1.0 - 1e-6, 1.0 - 1e-10, 1.0 - 1e-12])
def test_quantile_round_trip(p):
    y = steplaw.xi_quantile(p)
    if p > 0.9:
        assert steplaw.xi_survival(y) == pytest.approx(1.0 - p, rel=1e-8, abs=1e-15)
    else:
        assert steplaw.xi_cdf(y) == pytest.approx(p, abs=1e-11)


def test_quantile_monotone():
    ps = np.linspace(0.001, 0.999, 97)
    qs = [steplaw.xi_quantile(float(p)) for p in ps]
    assert all(a < b for a, b in zip(qs, qs[1:]))


@pytest.mark.parametrize("p", [0.0, 1.0, -0.2, 1.5])
def test_quantile_rejects_boundary(p):
    with pytest.raises(ValueError):
        steplaw.xi_quantile(p)


@pytest.mark.parametrize("gamma,expected", sorted(NEG_MOMENT.items()))
def test_neg_moment_frozen_values(gamma, expected):
    assert steplaw.xi_neg_moment(gamma) == pytest.approx(expected, abs=1e-9)


def test_neg_moment_convex_with_interior_dip():
    # m is convex on [0, 2) with m(0) = m(1) = 1 and m'(0) = -E[ln xi] < 0,
    # so it dips below 1 on (0, 1) and crosses back up exactly once
    gs = np.linspace(0.05, 1.9, 15)
    ms = [steplaw.xi_neg_moment(float(g)) for g in gs]
    for (g0, m0), (g1, m1) in zip(zip(gs, ms), zip(gs[2:], ms[2:])):
        mid = steplaw.xi_neg_moment(float(0.5 * (g0 + g1)))
        assert mid <= 0.5 * (m0 + m1) + 1e-10
    assert steplaw.xi_neg_moment(0.5) < 1.0 < steplaw.xi_neg_moment(1.5)


@pytest.mark.parametrize("gamma", [2.0, 2.7, 10.0])
def test_neg_moment_rejects_divergent_order(gamma):
    with pytest.raises(DivergentIntegralError):
        steplaw.xi_neg_moment(gamma)


def test_log_moments():
    assert steplaw.xi_log_mean() == pytest.approx(LOG_SQRT2, abs=1e-10)
    m2 = steplaw.xi_log_second_moment()
    assert m2 == pytest.approx(LOG_SECOND_MOMENT, abs=1e-9)
    var = m2 - steplaw.xi_log_mean() ** 2
    assert var == pytest.approx((math.pi / 4.0) ** 2, abs=1e-9)


def test_tail_exponent_root_is_one():
    rep = steplaw.solve_tail_exponent()
    assert rep.root == pytest.approx(1.0, abs=1e-9)
    assert abs(rep.residual) < 1e-9
    assert rep.iterations >= 1


def test_bessel_min_cdf():
    assert steplaw.bessel_min_cdf(0.5, 1.0) == 0.5
    assert steplaw.bessel_min_cdf(3.0, 2.0) == 1.0
    assert steplaw.bessel_min_cdf(-1.0, 2.0) == 0.0
    assert steplaw.bessel_min_cdf(0.0, 2.0) == 0.0
    with pytest.raises(ValueError):
        steplaw.bessel_min_cdf(0.5, 0.0)
    with pytest.raises(ValueError):
        steplaw.bessel_min_cdf(0.5, -1.0)


def test_quadrature_spec_validation():
    steplaw.QuadratureSpec()
    with pytest.raises(ValueError):
        steplaw.QuadratureSpec(abs_tol=0.0)
    with pytest.raises(ValueError):
        steplaw.QuadratureSpec(rel_tol=-1e-9)
    with pytest.raises(ValueError):
        steplaw.QuadratureSpec(max_subdivisions=0)
