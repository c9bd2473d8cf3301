"""Two-particle chain: branch laws, spine extraction, and the paired clocks."""

import numpy as np
import pytest
from scipy import stats as sps

from fvspine import fv
from fvspine.errors import OutOfHorizonError, SingularClockError
from fvspine.rng import RandomSource
from fvspine.steplaw import xi_cdf


@pytest.fixture(scope="module")
def traj():
    return fv.simulate_fv(RandomSource(301), max_branches=12, dt=1e-3)


@pytest.fixture(scope="module")
def timed_traj():
    # time-limited run so the grid has an unlabeled tail past the last branch
    return fv.simulate_fv(RandomSource(302), max_branches=10_000, dt=1e-3,
                          t_max=6.0)


def test_first_branch_value_law():
    rs = RandomSource(303)
    vals, times = fv.first_branch_sample(rs, 4000, dt=1e-3)
    assert np.all(vals > 0) and np.all(times > 0)
    res = sps.kstest(vals, np.vectorize(xi_cdf))
    assert res.pvalue > 0.01
    assert rs.draws > 0


def test_first_branch_scaling():
    # doubling the start is an exact float scaling, so the whole run maps
    # through the same draw sequence and the outputs double bit for bit
    vals1, times1 = fv.first_branch_sample(RandomSource(304), 300, dt=1e-3)
    vals2, times2 = fv.first_branch_sample(RandomSource(304), 300, dt=1e-3,
                                           y0=2.0)
    assert np.array_equal(vals2, 2.0 * vals1)
    assert np.array_equal(times2, 4.0 * times1)


def test_chain_shape(traj):
    assert traj.n_branches == 12
    assert traj.branch_times[0] == 0.0
    assert traj.branch_values[0] == traj.y0 == 1.0
    assert np.all(np.diff(traj.branch_times) > 0)
    assert np.all(traj.branch_values > 0)
    assert set(np.unique(traj.labels)) <= {1, 2}
    assert traj.final_time == traj.branch_times[-1]
    assert int(traj.is_branch.sum()) == 12


def test_branch_rows(traj):
    rows = np.flatnonzero(traj.is_branch == 1)
    assert np.array_equal(traj.grid[rows], traj.branch_times[1:])
    p1, p2 = traj.particle1[rows], traj.particle2[rows]
    # the dying column reads zero, the survivor carries the branch value
    dead = np.where(traj.labels == 1, p2, p1)
    alive = np.where(traj.labels == 1, p1, p2)
    assert np.all(dead == 0.0)
    assert np.array_equal(alive, traj.branch_values[1:])


def test_spine_at_branches(traj):
    sp = fv.extract_spine(traj)
    assert sp.meta["n_excluded"] == 0
    assert np.all(sp.x > 0)
    rows = np.flatnonzero(traj.is_branch == 1)
    assert np.array_equal(sp.x[rows], traj.branch_values[1:])
    assert sp.x[0] == traj.y0


def test_spine_follows_survivor(traj):
    sp = fv.extract_spine(traj)
    # inside each interval the spine equals one of the two recorded paths
    match = (sp.x == traj.particle1[:sp.t.size]) | \
        (sp.x == traj.particle2[:sp.t.size])
    assert np.all(match)


def test_clock_nodes(traj):
    assert traj.sigma[0] == 0.0 and traj.phi[0] == 0.0
    assert np.all(np.diff(traj.sigma) >= 0)
    assert np.all(np.diff(traj.phi) >= 0)
    assert traj.sigma_t[-1] == traj.branch_times[-1]
    assert traj.phi_t[-1] == traj.final_time


def test_hn_sn(traj):
    n, h, s, cut = fv.hn_sn_sequence(traj)
    assert n[0] == 0 and h[0] == 0.0 and s[0] == 0.0
    assert n.size + cut == traj.n_branches + 1
    assert np.all(h <= s)
    assert np.all(np.diff(h) > 0)
    assert np.all(np.diff(s) > 0)
    # the levels are the branch times and both relations hold on the tables
    lev = traj.branch_times[: n.size]
    assert np.allclose(np.interp(h, traj.sigma_t, traj.sigma), lev)
    assert np.allclose(np.interp(s, traj.phi_t, traj.phi), lev)
    # deep levels outlive the recorded clocks: a 12-branch run truncates
    assert cut > 0


def test_timed_run(timed_traj):
    tr = timed_traj
    assert tr.final_time >= 6.0
    assert tr.n_branches >= 1
    assert tr.branch_times[-1] < tr.final_time
    sp = fv.extract_spine(tr)
    assert sp.meta["n_excluded"] > 0
    assert sp.t[-1] == tr.branch_times[-1]
    # pair clock keeps ticking after the last branch, spine clock cannot
    assert tr.phi_t[-1] > tr.sigma_t[-1]


def test_additive_clock_exact():
    t = np.linspace(0.0, 1.0, 11)
    path = fv.PathGrid(t=t, x=np.full(11, 2.0))
    table = fv.additive_clock(path)
    assert np.allclose(table.s, t / 4.0)
    assert table.s[0] == 0.0


def test_additive_clock_errors():
    t = np.linspace(0.0, 1.0, 5)
    with pytest.raises(SingularClockError):
        fv.additive_clock(fv.PathGrid(t=t, x=np.array([1, 1, 0, 1, 1.0])))
    with pytest.raises(SingularClockError):
        fv.additive_clock(fv.PathGrid(t=t, x=np.array([1, 1, np.inf, 1, 1.0])))
    with pytest.raises(ValueError):
        fv.additive_clock(fv.PathGrid(t=np.array([0.0, 0.0, 1.0, 2.0, 3.0]),
                                      x=np.ones(5)))
    with pytest.raises(ValueError):
        fv.additive_clock(fv.PathGrid(t=np.array([0.0]), x=np.ones(1)))


def test_clock_inverse():
    t = np.linspace(0.0, 2.0, 21)
    table = fv.additive_clock(fv.PathGrid(t=t, x=np.ones(21)))
    # unit path: clock equals time
    assert fv.clock_inverse(table, 1.3) == pytest.approx(1.3)
    arr = fv.clock_inverse(table, np.array([0.0, 0.5, 2.0]))
    assert np.allclose(arr, [0.0, 0.5, 2.0])
    with pytest.raises(OutOfHorizonError):
        fv.clock_inverse(table, 2.5)
    with pytest.raises(ValueError):
        fv.clock_inverse(table, -0.1)


def test_determinism():
    a = fv.simulate_fv(RandomSource(305), max_branches=5, dt=1e-3)
    b = fv.simulate_fv(RandomSource(305), max_branches=5, dt=1e-3)
    assert np.array_equal(a.branch_values, b.branch_values)
    assert np.array_equal(a.sigma, b.sigma)
    assert a.draws == b.draws


def test_draw_accounting():
    rs = RandomSource(306)
    tr = fv.simulate_fv(rs, max_branches=5, dt=1e-3)
    assert rs.draws == tr.draws
    twin = RandomSource.from_state(rs.state())
    assert twin.uniform() == rs.uniform()


def test_validation():
    rs = RandomSource(1)
    with pytest.raises(ValueError):
        fv.simulate_fv(rs, y0=0.0)
    with pytest.raises(ValueError):
        fv.simulate_fv(rs, dt=0.5)
    with pytest.raises(ValueError):
        fv.simulate_fv(rs, max_branches=0)
    with pytest.raises(ValueError):
        fv.first_branch_sample(rs, 0)
    with pytest.raises(ValueError):
        fv.first_branch_sample(rs, 10, y0=-1.0)
