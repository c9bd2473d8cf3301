"""Two-particle branching diffusion on the half line and its spine.

Two brownian particles start at a common positive value; whenever one hits
zero it is killed and the pair restarts from the survivor's position.  The
spine is the piecewise survivor path read retrospectively: on each interval
between branches it follows the particle that outlives that interval.  Two
additive clocks ride along, the inverse-square integral of the spine and of
the pair radius; the spine clock dominates the pair clock node for node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import OutOfHorizonError, SingularClockError


@dataclass
class PathGrid:
    """A sampled path: node times and values, times strictly increasing."""
    t: np.ndarray
    x: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.t.shape != self.x.shape:
            raise ValueError("t and x must match in shape")


@dataclass
class ClockTable:
    """Cumulative additive clock on node times; starts at zero."""
    t: np.ndarray
    s: np.ndarray


@dataclass
class FvTrajectory:
    """One chain of the two-particle process.

    branch_times/branch_values include the start (time 0, value y0) at index
    0, so branch k is at index k.  labels[k-1] names the particle that
    survived the interval ending at branch k.  The grid rows carry both
    particle paths; at a branch row the dying column reads zero.  sigma is
    the spine inverse-square clock (nodes up to the last branch, where the
    retrospective labeling ends), phi the pair-radius clock (nodes up to the
    final time).
    """
    y0: float
    dt: float
    branch_times: np.ndarray
    branch_values: np.ndarray
    labels: np.ndarray
    grid: np.ndarray
    particle1: np.ndarray
    particle2: np.ndarray
    is_branch: np.ndarray
    sigma_t: np.ndarray
    sigma: np.ndarray
    phi_t: np.ndarray
    phi: np.ndarray
    steps: int
    draws: int
    final_time: float
    seed_manifest: dict = field(default_factory=dict)

    @property
    def n_branches(self) -> int:
        return int(self.labels.size)


def simulate_fv(rs, y0: float = 1.0, dt: float = 1e-4,
                max_branches: int = 20, t_max: float = math.inf,
                record_stride: int = 1) -> FvTrajectory:
    """Run the pair until max_branches branches or t_max, whichever first.

    dt is the base step at unit scale; the actual step contracts with the
    squared restart value so resolution tracks the diffusive scale of each
    interval.
    """
    y0 = float(y0)
    dt = float(dt)
    if y0 <= 0:
        raise ValueError("y0 must be positive")
    if not 0 < dt <= 1e-2:
        raise ValueError("dt must lie in (0, 1e-2]")
    if max_branches < 1:
        raise ValueError("max_branches must be at least 1")
    manifest = {"seed": rs.seed, "stream_id": rs.stream_id}
    out = backend.fv_chain(rs, y0, dt, int(max_branches), t_max=float(t_max),
                           record_stride=int(record_stride))
    return FvTrajectory(
        y0=y0, dt=dt,
        branch_times=out["branch_times"], branch_values=out["branch_values"],
        labels=out["labels"], grid=out["grid"],
        particle1=out["particle1"], particle2=out["particle2"],
        is_branch=out["is_branch"],
        sigma_t=out["sigma_t"], sigma=out["sigma"],
        phi_t=out["phi_t"], phi=out["phi"],
        steps=int(out["steps"]), draws=int(out["draws"]),
        final_time=float(out["final_time"]), seed_manifest=manifest)


def first_branch_sample(rs, n_sims: int, dt: float = 1e-4,
                        y0: float = 1.0):
    """First-branch values and times for n_sims independent pairs.

    Returns (values, times).  The value law is the step factor scaled by
    y0; times scale with y0 squared.
    """
    if n_sims < 1:
        raise ValueError("n_sims must be at least 1")
    if y0 <= 0:
        raise ValueError("y0 must be positive")
    return backend.fv_first_branch(rs, int(n_sims), float(dt), float(y0))


def extract_spine(traj: FvTrajectory) -> PathGrid:
    """Survivor path on the recorded grid, up to the last branch.

    Grid nodes after the last branch have no retrospective label yet and
    are dropped; their count is reported in meta["n_excluded"].
    """
    if traj.n_branches < 1:
        raise ValueError("trajectory records no branches")
    t_last = traj.branch_times[-1]
    keep = traj.grid <= t_last
    n_excluded = int((~keep).sum())
    t = traj.grid[keep]
    # interval index: first branch time at or after each node
    j = np.searchsorted(traj.branch_times[1:], t, side="left")
    take_first = traj.labels[j] == 1
    x = np.where(take_first, traj.particle1[keep], traj.particle2[keep])
    return PathGrid(t=t, x=x, meta={"n_excluded": n_excluded,
                                    "y0": traj.y0})


def additive_clock(path: PathGrid) -> ClockTable:
    """Trapezoid cumulative integral of the inverse square along a path."""
    t, x = path.t, path.x
    if t.size < 2:
        raise ValueError("need at least two nodes")
    if np.any(np.diff(t) <= 0):
        raise ValueError("node times must be strictly increasing")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise SingularClockError("path touches zero or is not finite")
    w = 1.0 / (x * x)
    incr = 0.5 * (w[1:] + w[:-1]) * np.diff(t)
    s = np.concatenate([[0.0], np.cumsum(incr)])
    return ClockTable(t=t.copy(), s=s)


def clock_inverse(table: ClockTable, s):
    """Time at which the clock reaches s, by linear interpolation."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise ValueError("clock values are nonnegative")
    if np.any(s_arr > table.s[-1]):
        raise OutOfHorizonError(
            f"clock only reaches {table.s[-1]:.6g} inside the horizon")
    out = np.interp(s_arr, table.s, table.t)
    return float(out) if np.isscalar(s) else out


def hn_sn_sequence(traj: FvTrajectory):
    """Level times of both clocks at each branch: (n, H_n, S_n, n_truncated).

    H_n is the first time the spine clock reaches T_n and S_n the first
    time the pair clock does, with H_0 = S_0 = 0.  The spine clock
    dominates the pair clock pointwise (the survivor coordinate sits below
    the pair radius), so it reaches every level first: H_n <= S_n.  Branch
    levels beyond either recorded clock span are unsolvable within the
    horizon; they are dropped from the end and returned as a count.
    """
    if traj.n_branches < 1:
        raise ValueError("trajectory records no branches")
    tb = traj.branch_times
    span = min(float(traj.sigma[-1]), float(traj.phi[-1]))
    k = int(np.searchsorted(tb, span, side="right"))
    lev = tb[:k]
    # clocks are monotone; interp picks the first time each level is hit
    h = np.interp(lev, traj.sigma, traj.sigma_t)
    s = np.interp(lev, traj.phi, traj.phi_t)
    return np.arange(k), h, s, int(tb.size - k)
