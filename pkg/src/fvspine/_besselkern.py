"""Kernels for the 3-d radial diffusion: endpoints, minima, intrinsic clock.

The radial step is exact at any step size: pick the frame where the current
position sits on the first axis, add an isotropic gaussian, take the norm.
The running minimum is also exact: between skeleton points the process is a
brownian bridge conditioned positive, whose minimum law inverts in closed
form.  The intrinsic clock (inverse-square integral) is the one quantity
that needs a grid; steps are kept at a fixed fraction of the squared radius
so the trapezoid error per step stays scale free, and a log-time
representation takes over on far horizons: exp(-s/2) times the radius at
time exp(s) is a stationary radial process with exact transitions, and the
clock advances by ds over its square.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtri

from .constants import UNIFORM_FLOOR
from .errors import BudgetExceededError

GROW_MARGIN = 50.0
MIN_MARGIN = 25.0


def _gauss(gen, n):
    u = gen.random(int(n))
    np.maximum(u, UNIFORM_FLOOR, out=u)
    return ndtri(u)


def _norm_step(x, dt, z):
    """Exact radial increment: z is (m, 3), dt scalar or (m,)."""
    rt = np.sqrt(dt)
    a = x + rt * z[:, 0]
    b = rt * z[:, 1]
    c = rt * z[:, 2]
    return np.sqrt(a * a + b * b + c * c)


def bessel_endpoint_batch(gen, n: int, x0: float, t: float):
    """n exact endpoint samples at time t; 3 draws per lane, lane-major."""
    z = _gauss(gen, 3 * n).reshape(n, 3)
    out = _norm_step(np.full(n, float(x0)), float(t), z)
    return out, 3 * n


def bessel_min_batch(gen, n: int, x0: float, target_ratio: float = 1e-3,
                     margin: float = MIN_MARGIN, dt_min: float = 1e-8,
                     max_rounds: int = 2_000_000, t_cap: float = None):
    """Running minimum over an adaptively extended horizon, lockstep.

    Per round each live lane consumes 4 draws: three for the exact endpoint
    step, one for the bridge minimum between the endpoints.  A lane parks
    once its minimum so far is at most target_ratio times its current
    position, which bounds the chance of any later improvement by the same
    ratio; with t_cap set, a lane whose elapsed time passes the cap parks
    early and counts as capped.  Returns (bridge_mins, grid_mins, steps,
    capped, draws); grid_mins track skeleton endpoints only and undershoot
    the true minimum.
    """
    n = int(n)
    x = np.full(n, float(x0))
    run_b = np.full(n, float(x0))
    run_g = np.full(n, float(x0))
    steps = np.zeros(n, dtype=np.int64)
    tt = np.zeros(n)
    idx = np.arange(n)
    out_b = np.empty(n)
    out_g = np.empty(n)
    out_s = np.empty(n, dtype=np.int64)
    capped = 0
    draws = 0
    rounds = 0
    while idx.size:
        rounds += 1
        if rounds > max_rounds:
            raise BudgetExceededError(
                f"{idx.size} lanes live after {max_rounds} rounds")
        m = idx.size
        dt = np.maximum(x * x / margin, dt_min)
        u = gen.random(4 * m)
        draws += 4 * m
        np.maximum(u, UNIFORM_FLOOR, out=u)
        z = ndtri(u[: 3 * m]).reshape(m, 3)
        y = _norm_step(x, dt, z)
        w = u[3 * m:]
        k = np.exp(-2.0 * x * y / dt)
        wv = np.maximum(k + w * (1.0 - k), UNIFORM_FLOOR)
        d = x - y
        disc = d * d - 2.0 * dt * np.log(wv)
        bmin = 0.5 * ((x + y) - np.sqrt(disc))
        np.minimum(run_b, bmin, out=run_b)
        np.minimum(run_g, np.minimum(x, y), out=run_g)
        steps += 1
        tt += dt
        x = y
        done = run_b <= target_ratio * y
        if t_cap is not None:
            over = tt >= t_cap
            capped += int(np.count_nonzero(over & ~done))
            done |= over
        if done.any():
            sel = idx[done]
            out_b[sel] = run_b[done]
            out_g[sel] = run_g[done]
            out_s[sel] = steps[done]
            keep = ~done
            idx, x, run_b, run_g, steps, tt = (
                idx[keep], x[keep], run_b[keep], run_g[keep], steps[keep],
                tt[keep])
    return out_b, out_g, out_s, capped, draws


def bessel_clock_lockstep(gen, n: int, x0: float, t_end: float = None,
                          u_end: float = None, margin: float = GROW_MARGIN,
                          dt_min: float = 1e-10, rec_du: float = 0.02,
                          max_rounds: int = 5_000_000):
    """Radial paths with the inverse-square clock, adaptive real-time grid.

    Each lane advances with step dt = x^2 / margin (floored, and clipped to
    land exactly on t_end when that is the stop rule), so the clock gains
    about 1/margin per step and intra-step dips below half the radius have
    probability exp(-margin) and are ignored.  Stops when every lane passes
    t_end (real horizon) or u_end (clock horizon).  Records (t, x, clock)
    per lane whenever the clock has advanced rec_du since the last record.

    Returns (rec, x_end, a_end, t_end_arr, draws) where rec is a list of
    (t_nodes, x_nodes, a_nodes) arrays per lane, each starting at the lane
    origin (0, x0, 0).
    """
    if (t_end is None) == (u_end is None):
        raise ValueError("give exactly one of t_end, u_end")
    n = int(n)
    x = np.full(n, float(x0))
    t = np.zeros(n)
    a = np.zeros(n)
    last_a = np.zeros(n)
    rec_t = [[0.0] for _ in range(n)]
    rec_x = [[float(x0)] for _ in range(n)]
    rec_a = [[0.0] for _ in range(n)]
    live = np.ones(n, dtype=bool)
    draws = 0
    rounds = 0
    while live.any():
        rounds += 1
        if rounds > max_rounds:
            raise BudgetExceededError(
                f"{int(live.sum())} lanes live after {max_rounds} rounds")
        ids = np.flatnonzero(live)
        m = ids.size
        xl = x[ids]
        dt = np.maximum(xl * xl / margin, dt_min)
        if t_end is not None:
            dt = np.minimum(dt, t_end - t[ids])
        z = _gauss(gen, 3 * m).reshape(m, 3)
        draws += 3 * m
        y = _norm_step(xl, dt, z)
        da = dt * 0.5 * (1.0 / (xl * xl) + 1.0 / (y * y))
        t[ids] += dt
        a[ids] += da
        x[ids] = y
        for j, i in enumerate(ids):
            if a[i] - last_a[i] >= rec_du:
                rec_t[i].append(t[i])
                rec_x[i].append(float(y[j]))
                rec_a[i].append(a[i])
                last_a[i] = a[i]
        if t_end is not None:
            live[ids] = t[ids] < t_end
        else:
            live[ids] = a[ids] < u_end
        just_done = ids[~live[ids]]
        for i in just_done:
            if rec_a[i][-1] != a[i]:
                rec_t[i].append(t[i])
                rec_x[i].append(float(x[i]))
                rec_a[i].append(a[i])
    rec = [(np.array(rec_t[i]), np.array(rec_x[i]), np.array(rec_a[i]))
           for i in range(n)]
    return rec, x.copy(), a.copy(), t.copy(), draws


def ou_radial_lockstep(gen, n: int, r0, a0, u_end: float, ds: float = 0.01,
                       fine_below: float = 0.15, nsub: int = 32,
                       rec_ds: float = 0.05, max_rounds: int = 5_000_000):
    """Log-time representation: radial stationary process with exact steps.

    The radius r at log-time s stands for exp(-s/2) times the position at
    real time exp(s); the clock gains ds over r squared.  Lanes march on a
    shared s grid of pitch ds; a lane below fine_below refines its step
    nsub-fold for the clock trapezoid (the transition itself is exact at
    any step).  Per round, coarse lanes consume 3 draws each (lane
    ascending), then fine lanes 3*nsub each.  Runs until every lane's clock
    passes u_end.  Records (clock, s/2 + log r) per lane on multiples of
    rec_ds.

    Returns (rec, draws) with rec a list of (u_nodes, g_nodes) per lane,
    starting at the lane's (a0, s0/2 + log r0) origin with s0 = 0.
    """
    n = int(n)
    r = np.asarray(r0, dtype=float).copy()
    a = np.asarray(a0, dtype=float).copy()
    if r.shape != (n,) or a.shape != (n,):
        raise ValueError("r0 and a0 must be (n,) arrays")
    rec_u = [[float(a[i])] for i in range(n)]
    rec_g = [[math.log(r[i])] for i in range(n)]
    s = 0.0
    next_rec = rec_ds
    ef_c = math.exp(-ds / 2.0)
    sd_c = math.sqrt(1.0 - math.exp(-ds))
    ef_f = math.exp(-ds / (2.0 * nsub))
    sd_f = math.sqrt(1.0 - math.exp(-ds / nsub))
    draws = 0
    rounds = 0
    while (a < u_end).any():
        rounds += 1
        if rounds > max_rounds:
            raise BudgetExceededError(
                f"clock short of {u_end} after {max_rounds} rounds")
        fine = r < fine_below
        coarse = ~fine
        ic = np.flatnonzero(coarse)
        if ic.size:
            z = _gauss(gen, 3 * ic.size).reshape(-1, 3)
            draws += 3 * ic.size
            rc = r[ic]
            y = np.sqrt((ef_c * rc + sd_c * z[:, 0]) ** 2
                        + (sd_c * z[:, 1]) ** 2 + (sd_c * z[:, 2]) ** 2)
            a[ic] += ds * 0.5 * (1.0 / (rc * rc) + 1.0 / (y * y))
            r[ic] = y
        nf = np.flatnonzero(fine)
        if nf.size:
            z = _gauss(gen, 3 * nsub * nf.size).reshape(nf.size, nsub, 3)
            draws += 3 * nsub * nf.size
            rf = r[nf]
            af = np.zeros(nf.size)
            dss = ds / nsub
            for k in range(nsub):
                y = np.sqrt((ef_f * rf + sd_f * z[:, k, 0]) ** 2
                            + (sd_f * z[:, k, 1]) ** 2
                            + (sd_f * z[:, k, 2]) ** 2)
                af += dss * 0.5 * (1.0 / (rf * rf) + 1.0 / (y * y))
                rf = y
            a[nf] += af
            r[nf] = rf
        s += ds
        if s >= next_rec - 1e-12:
            g = 0.5 * s + np.log(r)
            for i in range(n):
                rec_u[i].append(float(a[i]))
                rec_g[i].append(float(g[i]))
            next_rec += rec_ds
    g = 0.5 * s + np.log(r)
    for i in range(n):
        if rec_u[i][-1] != a[i]:
            rec_u[i].append(float(a[i]))
            rec_g[i].append(float(g[i]))
    rec = [(np.array(rec_u[i]), np.array(rec_g[i])) for i in range(n)]
    return rec, draws


def bessel_euler_path(gen, x0: float, t_max: float, dt: float):
    """Plain drift-plus-noise grid path; biased at coarse dt, for contrast."""
    n = int(math.ceil(t_max / dt))
    z = _gauss(gen, n)
    t = np.empty(n + 1)
    x = np.empty(n + 1)
    t[0] = 0.0
    x[0] = float(x0)
    rt = math.sqrt(dt)
    cur = float(x0)
    for k in range(n):
        cur = cur + dt / cur + rt * float(z[k])
        if cur <= 0.0:
            cur = 1e-300
        t[k + 1] = t[k] + dt
        x[k + 1] = cur
    return t, x, n
