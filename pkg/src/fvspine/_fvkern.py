"""Two-particle kernels: lockstep first-branch batches and full chains.

Stepping contract (same in both backends):

* per-branch base step dt_k = dt * Y_k^2, grown by g = floor(d^2 / (50 dt_k))
  clipped to [1, 4096] where d is the smaller particle position, so a step
  never exceeds d^2/50 and undetected wall hits stay below the 1e-12 coin
  floor everywhere;
* each step draws two gaussians (particle 1 then particle 2); a step enters
  joint refinement deterministically when an endpoint is nonpositive or an
  endpoint product falls under the coin floor for either particle;
* refinement rebuilds both bridges on 64 sub-intervals: two conditional
  gaussians per interior node (particle 1 then 2), then per sub-interval the
  events are checked in pinned order (particle 1 direct, particle 1 coin,
  particle 2 direct, particle 2 coin); the first event is the branch, the
  branch time lands on the sub-grid, and the survivor keeps its own bridge
  value at that node (reflected in the measure-zero case where both die in
  the same sub-interval);
* chains pre-draw step gaussians in blocks of 4096 uniforms; refinement
  draws interleave after the active block, exactly as consumed.

Clock integrals accumulate trapezoid contributions per sub-interval during
refinement and per step elsewhere; the per-particle integrals are kept
separately per branch interval so the spine clock can keep the survivor's
column once the interval closes.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtri

from .constants import UNIFORM_FLOOR
from .errors import BudgetExceededError

BLOCK = 4096
NSUB = 64
GROW_CAP = 4096
GROW_MARGIN = 50.0
Q_FLOOR = -math.log(1e-12)
_HALF_Q = 0.5 * Q_FLOOR

_ndtri = ndtri  # scalar calls route through the same cephes routine


def fv_refine_py(gen, a1: float, b1: float, a2: float, b2: float, s: float):
    """Joint conditional sub-walk of one flagged step.

    Returns (who, sub, value, i1, i2, iv, ndraws): who is 0 when neither
    particle hits zero, else the hitting particle index; sub the hitting
    sub-interval; value the survivor's position at that sub-node; i1/i2/iv
    the trapezoid integrals of x1^-2, x2^-2, (x1^2+x2^2)^-1 over the walked
    span.  The hitting side's own integral may overflow and is discarded by
    the caller.
    """
    ds = s / NSUB
    x1, x2 = a1, a2
    i1 = i2 = iv = 0.0
    nd = 0
    for j in range(NSUB):
        if j < NSUB - 1:
            rem = NSUB - j
            c = 1.0 / rem
            sd = math.sqrt(ds * (rem - 1.0) * c)
            u = gen.random()
            n1 = x1 + (b1 - x1) * c + sd * float(_ndtri(max(u, UNIFORM_FLOOR)))
            u = gen.random()
            n2 = x2 + (b2 - x2) * c + sd * float(_ndtri(max(u, UNIFORM_FLOOR)))
            nd += 2
        else:
            n1, n2 = b1, b2
        q1 = x1 * x1
        q2 = x2 * x2
        m1 = n1 * n1
        m2 = n2 * n2
        i1 += ds * 0.5 * (1.0 / q1 + 1.0 / m1) if m1 > 0.0 else math.inf
        i2 += ds * 0.5 * (1.0 / q2 + 1.0 / m2) if m2 > 0.0 else math.inf
        iv += ds * 0.5 * (1.0 / (q1 + q2) + 1.0 / (m1 + m2))
        hit1 = x1 <= 0.0 or n1 <= 0.0
        if not hit1:
            prod = x1 * n1
            if prod < _HALF_Q * ds:
                u = gen.random()
                nd += 1
                hit1 = u < math.exp(-2.0 * prod / ds)
        if hit1:
            v = n2 if n2 > 0.0 else (-n2 if n2 < 0.0 else 1e-300)
            return 1, j, v, i1, i2, iv, nd
        hit2 = x2 <= 0.0 or n2 <= 0.0
        if not hit2:
            prod = x2 * n2
            if prod < _HALF_Q * ds:
                u = gen.random()
                nd += 1
                hit2 = u < math.exp(-2.0 * prod / ds)
        if hit2:
            v = n1 if n1 > 0.0 else (-n1 if n1 < 0.0 else 1e-300)
            return 2, j, v, i1, i2, iv, nd
        x1, x2 = n1, n2
    return 0, -1, 0.0, i1, i2, iv, nd


def _grow(d: float, dtk: float) -> float:
    gf = d * d / (GROW_MARGIN * dtk)
    if gf < 1.0:
        return 1.0
    if gf >= GROW_CAP:
        return float(GROW_CAP)
    return float(math.floor(gf))


def fv_first_branch_py(gen, n_sims: int, dt: float, y0: float = 1.0,
                       max_rounds: int = 50_000_000):
    """First branch value and time for n independent pairs, lockstep.

    Per round: two gaussians per live pair in ascending pair order, then
    refinement draws for flagged pairs in ascending order.  Returns (Y1, T1).
    """
    n = int(n_sims)
    dt0 = dt * y0 * y0
    idx = np.arange(n)
    x1 = np.full(n, float(y0))
    x2 = np.full(n, float(y0))
    t = np.zeros(n)
    out_y = np.empty(n)
    out_t = np.empty(n)
    rounds = 0
    draws = 0
    while idx.size:
        rounds += 1
        if rounds > max_rounds:
            raise BudgetExceededError(
                f"{idx.size} pairs unbranched after {max_rounds} rounds")
        m = idx.size
        d = np.minimum(x1, x2)
        g = np.clip(np.floor(d * d / (GROW_MARGIN * dt0)), 1.0, float(GROW_CAP))
        s = g * dt0
        rt = np.sqrt(s)
        u = gen.random(2 * m)
        draws += 2 * m
        z = ndtri(np.maximum(u, UNIFORM_FLOOR))
        b1 = x1 + rt * z[0::2]
        b2 = x2 + rt * z[1::2]
        lim = _HALF_Q * s
        flag = (b1 <= 0.0) | (b2 <= 0.0) | (x1 * b1 < lim) | (x2 * b2 < lim)
        done = np.zeros(m, dtype=bool)
        if flag.any():
            for i in np.flatnonzero(flag):
                i = int(i)
                who, sub, val, _, _, _, nd = fv_refine_py(
                    gen, float(x1[i]), float(b1[i]), float(x2[i]), float(b2[i]),
                    float(s[i]))
                draws += nd
                if who:
                    k = idx[i]
                    out_y[k] = val
                    out_t[k] = t[i] + (sub + 1) * (s[i] / NSUB)
                    done[i] = True
        keep = ~done
        idx = idx[keep]
        x1 = b1[keep]
        x2 = b2[keep]
        t = t[keep] + s[keep]
    return out_y, out_t, draws


def fv_chain_py(gen, y0: float, dt: float, max_branches: int,
                t_max: float = math.inf, record_stride: int = 1,
                max_steps: int = 1_000_000_000):
    """One full trajectory with clocks, path records and branch bookkeeping.

    Returns a dict: branch arrays (times include T_0 = 0, values include
    y0), interval survivor labels, path records (t, x1, x2, is_branch),
    shared-grid clock node arrays (t, sigma, phi), totals.  Recording: the
    initial node, every record_stride-th step endpoint, every branch node,
    and the final node; clock nodes accompany every recorded node.
    """
    if record_stride < 1:
        record_stride = 0  # records only t=0, branches and the end
    x1 = x2 = float(y0)
    t = 0.0
    dtk = dt * y0 * y0
    branch_t = [0.0]
    branch_y = [float(y0)]
    labels = []
    rec_t, rec_x1, rec_x2, rec_b = [0.0], [x1], [x2], [0]
    sig_t, sig_c = [0.0], [0.0]
    phi_t, phi_c = [0.0], [0.0]
    pend_t, pend_a1, pend_a2 = [], [], []
    a1 = a2 = 0.0
    phi_total = 0.0
    sigma_total = 0.0
    zbuf = None
    zpos = BLOCK
    draws = 0
    steps = 0
    since_rec = 0
    while len(branch_t) <= max_branches and t < t_max:
        steps += 1
        if steps > max_steps:
            raise BudgetExceededError(f"chain exceeded {max_steps} steps")
        if zpos >= BLOCK:
            u = gen.random(BLOCK)
            draws += BLOCK
            np.maximum(u, UNIFORM_FLOOR, out=u)
            zbuf = ndtri(u)
            zpos = 0
        d = x1 if x1 < x2 else x2
        g = _grow(d, dtk)
        s = g * dtk
        rt = math.sqrt(s)
        b1 = x1 + rt * float(zbuf[zpos])
        b2 = x2 + rt * float(zbuf[zpos + 1])
        zpos += 2
        lim = _HALF_Q * s
        if b1 <= 0.0 or b2 <= 0.0 or x1 * b1 < lim or x2 * b2 < lim:
            who, sub, val, i1, i2, iv, nd = fv_refine_py(gen, x1, b1, x2, b2, s)
            draws += nd
            if who:
                tk = t + (sub + 1) * (s / NSUB)
                a1 += i1
                a2 += i2
                phi_total += iv
                base = sigma_total
                sigma_total += a2 if who == 1 else a1
                for j in range(len(pend_t)):
                    sig_t.append(pend_t[j])
                    sig_c.append(base + (pend_a2[j] if who == 1 else pend_a1[j]))
                pend_t.clear()
                pend_a1.clear()
                pend_a2.clear()
                sig_t.append(tk)
                sig_c.append(sigma_total)
                phi_t.append(tk)
                phi_c.append(phi_total)
                rec_t.append(tk)
                rec_x1.append(0.0 if who == 1 else val)
                rec_x2.append(val if who == 1 else 0.0)
                rec_b.append(1)
                branch_t.append(tk)
                branch_y.append(val)
                labels.append(2 if who == 1 else 1)
                x1 = x2 = val
                t = tk
                dtk = dt * val * val
                a1 = a2 = 0.0
                since_rec = 0
                continue
            a1 += i1
            a2 += i2
            phi_total += iv
        else:
            a1 += s * 0.5 * (1.0 / (x1 * x1) + 1.0 / (b1 * b1))
            a2 += s * 0.5 * (1.0 / (x2 * x2) + 1.0 / (b2 * b2))
            phi_total += s * 0.5 * (1.0 / (x1 * x1 + x2 * x2)
                                    + 1.0 / (b1 * b1 + b2 * b2))
        x1, x2 = b1, b2
        t += s
        since_rec += 1
        if record_stride and since_rec >= record_stride:
            since_rec = 0
            rec_t.append(t)
            rec_x1.append(x1)
            rec_x2.append(x2)
            rec_b.append(0)
            pend_t.append(t)
            pend_a1.append(a1)
            pend_a2.append(a2)
            phi_t.append(t)
            phi_c.append(phi_total)
    # final (unterminated) stretch: the path and the |V| clock keep going,
    # the spine clock cannot (no survivor yet), so sigma ends at T_last
    if rec_t[-1] != t:
        rec_t.append(t)
        rec_x1.append(x1)
        rec_x2.append(x2)
        rec_b.append(0)
    if phi_t[-1] != t:
        phi_t.append(t)
        phi_c.append(phi_total)
    return {
        "branch_times": np.array(branch_t),
        "branch_values": np.array(branch_y),
        "labels": np.array(labels, dtype=np.int8),
        "grid": np.array(rec_t),
        "particle1": np.array(rec_x1),
        "particle2": np.array(rec_x2),
        "is_branch": np.array(rec_b, dtype=np.int8),
        "sigma_t": np.array(sig_t),
        "sigma": np.array(sig_c),
        "phi_t": np.array(phi_t),
        "phi": np.array(phi_c),
        "steps": steps,
        "draws": draws,
        "final_time": t,
    }
