"""Strip-process kernel: reflected-jump diffusion in the band (0, pi/2).

The driver pre-draws gaussian increments in blocks of 4096 (uniforms through
the normal quantile, a shared numpy path so both backends see identical
increments), then hands candidate path segments to a scan routine that finds
the first wall event.  The compiled backend replaces only the scan.

Scan rules, pinned:

* a step is "refined" when either endpoint sits within ``band`` of either
  wall (out-of-domain endpoints count); ``band >= sqrt(-ln(1e-12) * delta)``
  makes the crossing probability of an unrefined step below 1e-24, so plain
  steps need no crossing coin at all;
* a refined step is filled with 31 Brownian-bridge interior points at
  resolution delta/32 (31 uniforms drawn as one block, breadth-first
  midpoint order, left to right within a level), then walked sub-interval by
  sub-interval: bottom direct exit, bottom coin, top direct exit, top coin,
  in that order, coins only when the endpoint product clears the 1e-12
  probability floor;
* occupation weights 1/sin^2 (singular at the bottom wall) and 1/cos^2
  (singular at the top) accrue from the left endpoint of every entered step
  or sub-interval, capped at ``cap``; the cap-hit count is reported per side
  so callers can check the advertised miss rate on the side they consume.

Event draws (bridge fill, coins) come from the same stream, after the
increment block they interrupt; consumption is path-dependent but
reproducible.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtri

from .constants import LOG_SQRT2, STRIP_CENTER, STRIP_WIDTH, UNIFORM_FLOOR

BLOCK = 4096
NSUB = 32
WEIGHT_CAP = 1e6
Q_FLOOR = -math.log(1e-12)      # coin spent when 2*a*b/dt is below this
_HALF_Q = 0.5 * Q_FLOOR


def _fill_order(n: int):
    order = []
    spans = [(0, n)]
    while spans:
        nxt = []
        for lo, hi in spans:
            if hi - lo >= 2:
                mid = (lo + hi) // 2
                order.append((mid, lo, hi))
                nxt.append((lo, mid))
                nxt.append((mid, hi))
        spans = nxt
    return tuple(order)


FILL_ORDER = _fill_order(NSUB)  # 31 (node, left, right) triples


def refine_band(delta: float) -> float:
    return max(0.05, math.sqrt(Q_FLOOR * delta))


def strip_refine_py(gen, a: float, b: float, delta: float, cap: float):
    """Walk one near-wall step at resolution delta/32.

    Returns (side, sub, w_sin, w_cos, cap_sin, cap_cos, ndraws): side is -1
    when the step completes without an exit, else 0 (bottom) or 1 (top) with
    ``sub`` the exiting sub-interval; weights are absolute time integrals.
    """
    ds = delta / NSUB
    trig = _HALF_Q * ds
    hw = STRIP_WIDTH
    u = gen.random(NSUB - 1)
    g = ndtri(np.maximum(u, UNIFORM_FLOOR))
    nd = NSUB - 1
    v = [0.0] * (NSUB + 1)
    v[0] = a
    v[NSUB] = b
    k = 0
    for node, lo, hi in FILL_ORDER:
        v[node] = 0.5 * (v[lo] + v[hi]) + 0.5 * math.sqrt((hi - lo) * ds) * float(g[k])
        k += 1
    w_sin = w_cos = 0.0
    cap_sin = cap_cos = 0
    x = a
    for j in range(NSUB):
        y = v[j + 1]
        sx = math.sin(x)
        cx = math.cos(x)
        ws = 1.0 / (sx * sx)
        if ws > cap:
            ws = cap
            cap_sin += 1
        wc = 1.0 / (cx * cx)
        if wc > cap:
            wc = cap
            cap_cos += 1
        w_sin += ws * ds
        w_cos += wc * ds
        if y <= 0.0:
            return 0, j, w_sin, w_cos, cap_sin, cap_cos, nd
        prod = x * y
        if prod < trig:
            nd += 1
            if gen.random() < math.exp(-2.0 * prod / ds):
                return 0, j, w_sin, w_cos, cap_sin, cap_cos, nd
        if y >= hw:
            return 1, j, w_sin, w_cos, cap_sin, cap_cos, nd
        prod = (hw - x) * (hw - y)
        if prod < trig:
            nd += 1
            if gen.random() < math.exp(-2.0 * prod / ds):
                return 1, j, w_sin, w_cos, cap_sin, cap_cos, nd
        x = y
    return -1, -1, w_sin, w_cos, cap_sin, cap_cos, nd


def strip_scan_py(gen, seg: np.ndarray, z0: float, delta: float,
                  band: float, cap: float):
    """Scan one candidate segment up to its first wall event.

    Returns (stop, side, frac, w_sin, w_cos, cap_sin, cap_cos, ndraws):
    ``stop`` is the index of the event step (len(seg) if none), ``frac`` the
    consumed fraction of that step in 1/32 units, weights and cap counts the
    occupation accrued over everything consumed.
    """
    m = seg.shape[0]
    hw = STRIP_WIDTH
    prevs = np.empty(m)
    prevs[0] = z0
    prevs[1:] = seg[:-1]
    dmin = np.minimum(np.minimum(prevs, hw - prevs), np.minimum(seg, hw - seg))
    near = dmin < band
    w_sin = w_cos = 0.0
    cap_sin = cap_cos = 0
    nd = 0
    stop = m
    side = -1
    frac = 0.0
    for i in np.flatnonzero(near):
        i = int(i)
        hit, sub, ws, wc, cs, cc, k = strip_refine_py(
            gen, float(prevs[i]), float(seg[i]), delta, cap)
        w_sin += ws
        w_cos += wc
        cap_sin += cs
        cap_cos += cc
        nd += k
        if hit >= 0:
            stop = i
            side = hit
            frac = (sub + 1) / NSUB
            break
    if stop:
        plain = ~near[:stop]
        if plain.any():
            x = prevs[:stop][plain]
            s = np.sin(x)
            c = np.cos(x)
            w_sin += float(np.minimum(1.0 / (s * s), cap).sum()) * delta
            w_cos += float(np.minimum(1.0 / (c * c), cap).sum()) * delta
    return stop, side, frac, w_sin, w_cos, cap_sin, cap_cos, nd


def strip_drive(rs, scan, u_max: float, delta: float, jumps: bool = True,
                cap: float = WEIGHT_CAP):
    """Run the strip process until the first jump at or past u_max.

    Returns a dict of per-jump arrays (r, z1, h, side, bm) plus step and cap
    accounting.  ``bm`` is the brownian part of each z1 increment, stored so
    the exact-jump invariant z1[k] == (z1[k-1] + bm[k]) + log(sqrt 2) stays
    checkable bit for bit.
    """
    gen = rs.generator()
    band = refine_band(delta)
    sd = math.sqrt(delta)
    units_max = u_max / delta
    z = STRIP_CENTER
    z1 = 0.0
    r_units = 0.0
    h = 0.0
    exc_units = 0.0
    w_sin = w_cos = 0.0
    exc_cap_sin = exc_cap_cos = 0
    out_r, out_z1, out_h, out_side, out_bm = [], [], [], [], []
    caps_used = 0
    draws = 0
    done = False
    while not done:
        u = gen.random(BLOCK)
        draws += BLOCK
        np.maximum(u, UNIFORM_FLOOR, out=u)
        inc = ndtri(u)
        inc *= sd
        pos = 0
        while pos < BLOCK:
            seg = z + np.cumsum(inc[pos:])
            stop, side, frac, ws, wc, cs, cc, nd = scan(
                gen, seg, z, delta, band, cap)
            draws += nd
            w_sin += ws
            w_cos += wc
            exc_cap_sin += cs
            exc_cap_cos += cc
            if side < 0:
                n = BLOCK - pos
                exc_units += n
                r_units += n
                z = float(seg[-1])
                pos = BLOCK
                continue
            used = stop + frac
            exc_units += used
            r_units += used
            tau = exc_units * delta
            excess = (w_sin if side == 1 else w_cos) - tau
            h += tau + excess
            caps_used += exc_cap_sin if side == 1 else exc_cap_cos
            uu = gen.random()
            draws += 1
            bm = math.sqrt(tau) * float(ndtri(max(uu, UNIFORM_FLOOR)))
            if jumps:
                z1 = (z1 + bm) + LOG_SQRT2
            else:
                z1 = z1 + bm
            out_r.append(r_units * delta)
            out_z1.append(z1)
            out_h.append(h)
            out_side.append(side)
            out_bm.append(bm)
            z = STRIP_CENTER
            exc_units = 0.0
            w_sin = w_cos = 0.0
            exc_cap_sin = exc_cap_cos = 0
            pos += stop + 1
            if r_units >= units_max:
                done = True
                break
    rs.sync_draws(draws)
    return {
        "r": np.array(out_r),
        "z1": np.array(out_z1),
        "h": np.array(out_h),
        "side": np.array(out_side, dtype=np.int8),
        "bm": np.array(out_bm),
        "steps": r_units,
        "cap_hits": caps_used,
        "draws": draws,
    }
