"""Quantile tables: accuracy in CDF units, scalar/vector agreement, exact tails."""
import numpy as np
import pytest

from fvspine import exitlaw, steplaw, tables


@pytest.fixture(scope="module")
def xi_tab():
    return tables.xi_table()


@pytest.fixture(scope="module")
def exit_tab():
    return tables.exit_table()


def test_xi_table_accuracy(xi_tab):
    rng = np.random.default_rng(7)
    p = rng.uniform(xi_tab.p_lo, xi_tab.p_hi, 5000)
    y = tables.table_eval_vector(xi_tab, p)
    err = max(abs(steplaw.xi_cdf(float(v)) - float(q)) for v, q in zip(y, p))
    assert err < 1e-8


def test_exit_table_accuracy(exit_tab):
    rng = np.random.default_rng(8)
    p = rng.uniform(exit_tab.p_lo, exit_tab.p_hi, 5000)
    t = tables.table_eval_vector(exit_tab, p)
    err = max(abs(exitlaw.exit_cdf(float(v)) - float(q)) for v, q in zip(t, p))
    assert err < 1e-8


def test_scalar_and_vector_eval_bitwise_equal(xi_tab, exit_tab):
    p = np.linspace(1e-7, 1.0 - 1e-7, 4001)
    for tab in (xi_tab, exit_tab):
        vec = tables.table_eval_vector(tab, p)
        sca = np.array([tables.table_eval_scalar(tab, float(q)) for q in p])
        assert np.array_equal(vec, sca)


def test_eval_at_knots_hits_knot_values(xi_tab):
    # searchsorted(side=right) puts an exact knot probability in the interval
    # it starts, so s = 0 and the cubic returns the stored quantile
    for i in [0, 1, 100, 2047, 4094]:
        p = float(xi_tab.knots[i])
        got = tables.table_eval_scalar(xi_tab, p)
        assert got == pytest.approx(steplaw.xi_quantile(p), rel=1e-10, abs=1e-12)


def test_table_monotone(xi_tab, exit_tab):
    p = np.linspace(1e-7, 1.0 - 1e-7, 30011)
    for tab in (xi_tab, exit_tab):
        v = tables.table_eval_vector(tab, p)
        assert np.all(np.diff(v) > 0.0)


@pytest.mark.parametrize("p", [1e-300, 1e-30, 1e-12, 1e-9, 5e-8])
def test_xi_lower_tail_exact(p):
    y = tables.xi_tail_quantile(p)
    assert steplaw.xi_cdf(y) == pytest.approx(p, rel=1e-9, abs=1e-14)


@pytest.mark.parametrize("q", [5e-8, 1e-9, 1e-12, 1e-30])
def test_xi_upper_tail_exact(q):
    y = tables.xi_tail_quantile(1.0 - q)
    assert steplaw.xi_survival(y) == pytest.approx(q, rel=1e-9)


@pytest.mark.parametrize("p", [1e-12, 1e-9, 5e-8])
def test_exit_lower_tail_exact(p):
    t = tables.exit_tail_quantile(p)
    assert exitlaw.exit_cdf(t) == pytest.approx(p, rel=1e-9, abs=1e-14)


@pytest.mark.parametrize("q", [5e-8, 1e-9, 1e-12, 1e-30])
def test_exit_upper_tail_exact(q):
    t = tables.exit_tail_quantile(1.0 - q)
    assert exitlaw.exit_sf(t) == pytest.approx(q, rel=1e-9)


def test_tail_and_table_meet_smoothly(xi_tab):
    # both representations evaluated at the edge knot agree in CDF units
    lo = tables.xi_tail_quantile(xi_tab.p_lo)
    hi = tables.table_eval_scalar(xi_tab, xi_tab.p_lo)
    assert steplaw.xi_cdf(lo) == pytest.approx(steplaw.xi_cdf(hi), abs=1e-8)
