"""Radial diffusion: exact endpoint, minimum laws, and the intrinsic clock."""

import math

import numpy as np
import pytest
from scipy import stats as sps

from fvspine import bessel
from fvspine.errors import OutOfHorizonError
from fvspine.rng import RandomSource

# endpoint mean at unit time from unit start, frozen from quadrature of the
# noncentral radial density
MEAN_AT_UNIT = 1.8493204333124587
# martingale pin: mean inverse radius at unit time is erf(1/sqrt(2))
INV_MEAN_AT_UNIT = 0.6826894921370859


def test_endpoint_mean():
    rs = RandomSource(401)
    x = bessel.sample_bessel_endpoint(rs, 200_000, 1.0, 1.0)
    assert np.all(x > 0)
    se = x.std() / np.sqrt(x.size)
    assert abs(x.mean() - MEAN_AT_UNIT) < 4 * se
    inv = 1.0 / x
    se_inv = inv.std() / np.sqrt(x.size)
    assert abs(inv.mean() - INV_MEAN_AT_UNIT) < 4 * se_inv
    assert rs.draws == 600_000


def test_endpoint_scaling_exact():
    # doubling start and quadrupling time is an exact float mapping
    a = bessel.sample_bessel_endpoint(RandomSource(402), 500, 1.0, 1.0)
    b = bessel.sample_bessel_endpoint(RandomSource(402), 500, 2.0, 4.0)
    assert np.array_equal(b, 2.0 * a)


def test_min_exact_law():
    rs = RandomSource(403)
    m = bessel.sample_bessel_min_exact(rs, 50_000, 2.0)
    assert np.all((0 < m) & (m < 2.0))
    res = sps.kstest(m / 2.0, "uniform")
    assert res.pvalue > 0.01
    e = -np.log(m / 2.0)
    assert abs(e.mean() - 1.0) < 4 / np.sqrt(e.size)


def test_min_simulated_law():
    rs = RandomSource(404)
    b, g, steps = bessel.simulate_bessel_min(rs, 20_000, 1.0)
    e = -np.log(b)
    res = sps.kstest(e, "expon")
    assert res.pvalue > 0.01
    assert abs(e.mean() - 1.0) < 4 / np.sqrt(e.size)
    # endpoint-only minima never dip inside steps: biased high, law rejected
    assert np.all(g >= b)
    assert sps.kstest(-np.log(g), "expon").pvalue < 1e-6
    assert np.all(steps >= 1)


def test_min_matches_exact_sampler_in_law():
    b, _, _ = bessel.simulate_bessel_min(RandomSource(405), 8000, 1.5)
    m = bessel.sample_bessel_min_exact(RandomSource(406), 8000, 1.5)
    assert sps.ks_2samp(b, m).pvalue > 0.01


def test_exact_norm_path():
    rs = RandomSource(407)
    path = bessel.simulate_bessel3(rs, 1.0, 5.0)
    assert path.t[0] == 0.0 and path.x[0] == 1.0
    assert path.t[-1] == pytest.approx(5.0)
    assert np.all(path.x > 0)
    assert np.all(np.diff(path.t) > 0)
    clock = path.meta["clock"]
    assert clock[0] == 0.0 and np.all(np.diff(clock) > 0)
    assert rs.draws > 0


def test_euler_path():
    rs = RandomSource(408)
    path = bessel.simulate_bessel3(rs, 1.0, 1.0, method="euler", dt=1e-3)
    assert path.t.size == 1001
    assert np.all(path.x > 0)
    assert rs.draws == 1000
    # fine grid lands near the exact endpoint mean across replicas
    ends = [bessel.simulate_bessel3(RandomSource(900 + k), 1.0, 1.0,
                                    method="euler", dt=1e-2).x[-1]
            for k in range(400)]
    ends = np.array(ends)
    se = ends.std() / 20.0
    assert abs(ends.mean() - MEAN_AT_UNIT) < max(4 * se, 0.05)


def test_intrinsic_realtime():
    rs = RandomSource(409)
    paths = bessel.intrinsic_log_realtime(rs, 60, 1.0, 6.0)
    assert len(paths) == 60
    for p in paths[:5]:
        assert p.t[0] == 0.0 and p.x[0] == 0.0  # G(0) = log x0 = 0
        assert p.t[-1] >= 6.0
        assert np.all(np.diff(p.t) > 0)
    slopes = np.array([p.x[-1] / p.t[-1] for p in paths])
    assert 0.30 < slopes.mean() < 0.62


def test_intrinsic_ou_matches_realtime():
    n = 150
    a = bessel.intrinsic_log_realtime(RandomSource(410), n, 1.0, 6.0)
    b = bessel.intrinsic_log_ou(RandomSource(411), n, 1.0, 6.0)
    for p in b[:5]:
        assert p.t[0] == 0.0 and p.x[0] == 0.0
        assert p.t[-1] >= 6.0
        assert np.all(np.isfinite(p.x))
    ga = np.array([bessel.path_value_at(p, 6.0) for p in a])
    gb = np.array([bessel.path_value_at(p, 6.0) for p in b])
    assert sps.ks_2samp(ga, gb).pvalue > 0.01
    se = np.hypot(ga.std() / np.sqrt(n), gb.std() / np.sqrt(n))
    assert abs(ga.mean() - gb.mean()) < 4 * se


def test_path_value_at():
    p = bessel.PathGrid(t=np.array([0.0, 1.0, 2.0]),
                        x=np.array([0.0, 2.0, 2.0]))
    assert bessel.path_value_at(p, 0.5) == 1.0
    with pytest.raises(ValueError):
        bessel.path_value_at(p, 2.5)


def test_draw_accounting():
    rs = RandomSource(412)
    bessel.intrinsic_log_ou(rs, 10, 1.0, 3.0)
    twin = RandomSource.from_state(rs.state())
    assert twin.uniform() == rs.uniform()


def test_validation():
    rs = RandomSource(1)
    with pytest.raises(ValueError):
        bessel.sample_bessel_endpoint(rs, 0, 1.0, 1.0)
    with pytest.raises(ValueError):
        bessel.sample_bessel_min_exact(rs, 10, -1.0)
    with pytest.raises(ValueError):
        bessel.simulate_bessel_min(rs, 10, 1.0, target_ratio=2.0)
    with pytest.raises(ValueError):
        bessel.simulate_bessel3(rs, 1.0, 1.0, method="magic")
    with pytest.raises(ValueError):
        bessel.intrinsic_log_ou(rs, 10, 1.0, 3.0, prefix_t=2.0)


def test_intrinsic_log_path_matches_kernel_clock():
    # per-step records make the node trapezoid reproduce the kernel clock,
    # so the transform route carries no coarse-grid bias
    p = bessel.simulate_bessel3(RandomSource(420), 1.0, 1e6)
    ct = bessel.additive_clock(p)
    np.testing.assert_allclose(ct.s[-1], p.meta["clock"][-1], rtol=1e-10)
    g = bessel.intrinsic_log_path(p)
    assert g.x[0] == 0.0
    assert g.t[0] == 0.0
    assert g.t[1] - g.t[0] == pytest.approx(0.01)
    assert g.meta["clock_span"] >= g.t[-1]
    # agrees with the fused real-time route in law at a matched clock level
    n = 80
    tv = []
    for i in range(n):
        pp = bessel.simulate_bessel3(RandomSource(5000 + i), 1.0, 1e10)
        tv.append(bessel.path_value_at(bessel.intrinsic_log_path(pp), 4.0))
    rt = bessel.intrinsic_log_realtime(RandomSource(5999), n, 1.0, 4.5)
    rv = [bessel.path_value_at(q, 4.0) for q in rt]
    assert sps.ks_2samp(tv, rv).pvalue > 0.005
    se = np.hypot(np.std(tv, ddof=1), np.std(rv, ddof=1)) / np.sqrt(n)
    assert abs(np.mean(tv) - np.mean(rv)) < 4 * se


def test_intrinsic_log_path_validation():
    p = bessel.simulate_bessel3(RandomSource(421), 1.0, 2.0)
    with pytest.raises(ValueError):
        bessel.intrinsic_log_path(p, du=0.0)
    short = bessel.PathGrid(t=np.array([0.0, 1e-6]),
                            x=np.array([100.0, 100.0]))
    with pytest.raises(OutOfHorizonError):
        bessel.intrinsic_log_path(short)


def test_bessel_tail_check_levels():
    reps = bessel.bessel_tail_check(RandomSource(422), [1.0, 2.0, 50.0],
                                    100_000)
    for rep, u in zip(reps, (1.0, 2.0)):
        assert rep.extras["u"] == u
        assert not rep.extras["flagged"]
        assert abs(rep.estimate - (-1.0)) < 4 * rep.stderr
        assert rep.extras["hits"] > 0
    assert reps[2].extras["flagged"]
    assert math.isnan(reps[2].estimate)
    with pytest.raises(ValueError):
        bessel.bessel_tail_check(RandomSource(1), [], 100)
    with pytest.raises(ValueError):
        bessel.bessel_tail_check(RandomSource(1), [-1.0], 100)


def test_truncated_min_vs_exact_report():
    rep = bessel.truncated_min_vs_exact(RandomSource(423), n=4000)
    crit_1pct = 1.628 * math.sqrt(2.0 / 4000.0)
    assert rep.estimate < crit_1pct
    assert rep.extras["p_value"] > 0.01
    assert rep.extras["capped"] == 0
    # the uncorrected grid minimum must be flagged as biased high
    assert rep.extras["grid_bias_p"] < 1e-6
    with pytest.raises(ValueError):
        bessel.truncated_min_vs_exact(RandomSource(1), n=10)
    with pytest.raises(ValueError):
        bessel.truncated_min_vs_exact(RandomSource(1), dt=-1.0)
