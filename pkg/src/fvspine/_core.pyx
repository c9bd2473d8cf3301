# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the sequential sampling kernels.

Each routine here transcribes its reference implementation operation for
operation: same draw order, same arithmetic expression shapes, same event
ordering, same floors and caps.  Together with -ffp-contract=off at compile
time and libm/cephes scalars on both sides, every control-flow decision and
every draw-consuming branch lands on identical bits, so the two backends
produce identical event streams from the same generator state.

The one advertised exception: plain-step strip occupation weights are summed
pairwise by numpy in the reference and sequentially here, so the returned
weights (never the events, counts or draws) may differ at the last few ulps.

References transcribed: _kernels.xi_block / exit_block, _stripkern
.strip_refine_py / strip_scan_py, _fvkern.fv_refine_py / fv_first_branch_py /
fv_chain_py, and the tail formulas in tables.py.
"""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport INFINITY, M_PI, cos, exp, floor, log, sin, sqrt, tan
from numpy.random cimport bitgen_t
from scipy.special.cython_special cimport ndtri

from . import _fvkern, _stripkern
from .constants import STRIP_CENTER, STRIP_WIDTH, UNIFORM_FLOOR
from .errors import BudgetExceededError

# Shared numeric constants, taken from the reference modules at import so the
# two backends cannot drift apart.
cdef double UF = UNIFORM_FLOOR
cdef double HW = STRIP_WIDTH
cdef double SC = STRIP_CENTER
cdef double STRIP_HALF_Q = _stripkern._HALF_Q
cdef double FV_HALF_Q = _fvkern._HALF_Q
cdef double FV_GROW_MARGIN = _fvkern.GROW_MARGIN
cdef double FV_GROW_CAP = <double> _fvkern.GROW_CAP

if _stripkern.NSUB != 32 or _fvkern.NSUB != 64 or _fvkern.BLOCK != 4096:
    raise ImportError("compiled kernels were built for other sub-step counts")

# Brownian-bridge fill order for the strip refinement (31 interior nodes of a
# 32-interval bridge, breadth first), copied from the reference table.
cdef int FILL_NODE[31]
cdef int FILL_LO[31]
cdef int FILL_HI[31]
_fill = _stripkern.FILL_ORDER
if len(_fill) != 31:
    raise ImportError("unexpected bridge fill order length")
for _k in range(31):
    FILL_NODE[_k] = _fill[_k][0]
    FILL_LO[_k] = _fill[_k][1]
    FILL_HI[_k] = _fill[_k][2]
del _fill, _k

cdef const char *CAPSULE_NAME = "BitGenerator"


cdef bitgen_t *_bg(object bitgen_obj) except NULL:
    """Raw generator struct behind a numpy BitGenerator."""
    capsule = bitgen_obj.capsule
    if not PyCapsule_IsValid(capsule, CAPSULE_NAME):
        raise ValueError("expected a numpy BitGenerator")
    return <bitgen_t *> PyCapsule_GetPointer(capsule, CAPSULE_NAME)


# --- quantile tables and exact tails ----------------------------------------

cdef double _xi_tail(double p) noexcept nogil:
    cdef double q
    if p >= 0.5:
        q = 1.0 - p
        if q < 1e-300:
            q = 1e-300
        return sqrt(2.0 / tan(0.5 * M_PI * q))
    return sqrt(2.0 * tan(0.5 * M_PI * p))


cdef double _exit_tail(double p) noexcept nogil:
    cdef double q, z, r
    if p >= 0.5:
        q = 1.0 - p
        if q < 1e-300:
            q = 1e-300
        return -0.5 * log(M_PI * q / 4.0)
    z = ndtri(0.25 * p)
    r = SC / z
    return r * r


cdef Py_ssize_t _locate(const double[::1] knots, double p) noexcept nogil:
    # upper-bound bisection, then clip to a valid cubic segment; matches
    # np.searchsorted(side="right") - 1 plus np.clip
    cdef Py_ssize_t lo = 0, hi = knots.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if p < knots[mid]:
            hi = mid
        else:
            lo = mid + 1
    lo -= 1
    if lo < 0:
        lo = 0
    elif lo > knots.shape[0] - 2:
        lo = knots.shape[0] - 2
    return lo


cdef double _table_eval(const double[::1] knots, const double[::1] c0,
                        const double[::1] c1, const double[::1] c2,
                        const double[::1] c3, double p) noexcept nogil:
    cdef Py_ssize_t i = _locate(knots, p)
    cdef double s = p - knots[i]
    return ((c0[i] * s + c1[i]) * s + c2[i]) * s + c3[i]


def _tail_probe(double p, str which):
    """Test hook: the compiled tail inversions, for parity checks."""
    if which == "xi":
        return _xi_tail(p)
    if which == "exit":
        return _exit_tail(p)
    raise ValueError("which must be 'xi' or 'exit'")


def xi_block(object bitgen, Py_ssize_t n,
             object knots_obj, object c0_obj, object c1_obj,
             object c2_obj, object c3_obj, double p_lo, double p_hi):
    """n step factors, one uniform each; mirrors _kernels.xi_block."""
    cdef bitgen_t *rng = _bg(bitgen)
    cdef const double[::1] knots = knots_obj
    cdef const double[::1] c0 = c0_obj
    cdef const double[::1] c1 = c1_obj
    cdef const double[::1] c2 = c2_obj
    cdef const double[::1] c3 = c3_obj
    out_arr = np.empty(n)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double p
    for i in range(n):
        p = rng.next_double(rng.state)
        if p < UF:
            p = UF
        if p < p_lo or p > p_hi:
            out[i] = _xi_tail(p)
        else:
            out[i] = _table_eval(knots, c0, c1, c2, c3, p)
    return out_arr


def exit_block(object bitgen, Py_ssize_t n,
               object knots_obj, object c0_obj, object c1_obj,
               object c2_obj, object c3_obj, double p_lo, double p_hi):
    """n strip exits, two uniforms each; mirrors _kernels.exit_block."""
    cdef bitgen_t *rng = _bg(bitgen)
    cdef const double[::1] knots = knots_obj
    cdef const double[::1] c0 = c0_obj
    cdef const double[::1] c1 = c1_obj
    cdef const double[::1] c2 = c2_obj
    cdef const double[::1] c3 = c3_obj
    dur_arr = np.empty(n)
    top_arr = np.empty(n, dtype=np.bool_)
    cdef double[::1] dur = dur_arr
    cdef unsigned char[::1] top = top_arr.view(np.uint8)
    cdef Py_ssize_t i
    cdef double p, u2
    for i in range(n):
        p = rng.next_double(rng.state)
        u2 = rng.next_double(rng.state)
        if p < UF:
            p = UF
        if p < p_lo or p > p_hi:
            dur[i] = _exit_tail(p)
        else:
            dur[i] = _table_eval(knots, c0, c1, c2, c3, p)
        top[i] = 1 if u2 < 0.5 else 0
    return dur_arr, top_arr


# --- strip scan --------------------------------------------------------------

cdef int _strip_refine(bitgen_t *rng, double a, double b, double delta,
                       double cap, int *sub_out, double *wsin_acc,
                       double *wcos_acc, int *csin_acc, int *ccos_acc,
                       long long *nd_acc) noexcept:
    """One near-wall step at resolution delta/32; adds into the accumulators.

    Returns the exit side (-1 none, 0 bottom, 1 top) and writes the exiting
    sub-interval index.  Transcribes _stripkern.strip_refine_py.
    """
    cdef double ds = delta / 32.0
    cdef double trig = STRIP_HALF_Q * ds
    cdef double g[31]
    cdef double v[33]
    cdef double u, x, y, sx, cx, ws, wc, prod
    cdef double w_sin = 0.0, w_cos = 0.0
    cdef int cap_sin = 0, cap_cos = 0
    cdef long long nd = 31
    cdef int k, j
    cdef int side = -1, sub = -1
    for k in range(31):
        u = rng.next_double(rng.state)
        if u < UF:
            u = UF
        g[k] = ndtri(u)
    v[0] = a
    v[32] = b
    for k in range(31):
        v[FILL_NODE[k]] = 0.5 * (v[FILL_LO[k]] + v[FILL_HI[k]]) \
            + 0.5 * sqrt((FILL_HI[k] - FILL_LO[k]) * ds) * g[k]
    x = a
    for j in range(32):
        y = v[j + 1]
        sx = sin(x)
        cx = cos(x)
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
            side = 0
            sub = j
            break
        prod = x * y
        if prod < trig:
            nd += 1
            u = rng.next_double(rng.state)
            if u < exp(-2.0 * prod / ds):
                side = 0
                sub = j
                break
        if y >= HW:
            side = 1
            sub = j
            break
        prod = (HW - x) * (HW - y)
        if prod < trig:
            nd += 1
            u = rng.next_double(rng.state)
            if u < exp(-2.0 * prod / ds):
                side = 1
                sub = j
                break
        x = y
    sub_out[0] = sub
    wsin_acc[0] += w_sin
    wcos_acc[0] += w_cos
    csin_acc[0] += cap_sin
    ccos_acc[0] += cap_cos
    nd_acc[0] += nd
    return side


def strip_scan(object bitgen, object seg_obj, double z0, double delta,
               double band, double cap):
    """First wall event on one candidate segment; mirrors strip_scan_py.

    Returns (stop, side, frac, w_sin, w_cos, cap_sin, cap_cos, ndraws).
    Plain-step weights are summed sequentially (the reference sums them
    pairwise), the sole tolerated cross-backend difference.
    """
    cdef bitgen_t *rng = _bg(bitgen)
    cdef const double[::1] seg = seg_obj
    cdef Py_ssize_t m = seg.shape[0]
    cdef double w_sin = 0.0, w_cos = 0.0
    cdef double plain_sin = 0.0, plain_cos = 0.0
    cdef int cap_sin = 0, cap_cos = 0
    cdef long long nd = 0
    cdef Py_ssize_t stop = m
    cdef int side = -1
    cdef double frac = 0.0
    cdef double prev = z0
    cdef double x, y, dm, sx, cx, ws, wc
    cdef int hit, hsub
    cdef Py_ssize_t i
    for i in range(m):
        x = prev
        y = seg[i]
        dm = x
        if HW - x < dm:
            dm = HW - x
        if y < dm:
            dm = y
        if HW - y < dm:
            dm = HW - y
        if dm < band:
            hit = _strip_refine(rng, x, y, delta, cap, &hsub, &w_sin, &w_cos,
                                &cap_sin, &cap_cos, &nd)
            if hit >= 0:
                stop = i
                side = hit
                frac = (hsub + 1) / 32.0
                break
        else:
            sx = sin(x)
            cx = cos(x)
            ws = 1.0 / (sx * sx)
            if ws > cap:
                ws = cap
            wc = 1.0 / (cx * cx)
            if wc > cap:
                wc = cap
            plain_sin += ws
            plain_cos += wc
        prev = y
    if stop:
        w_sin += plain_sin * delta
        w_cos += plain_cos * delta
    return stop, side, frac, w_sin, w_cos, cap_sin, cap_cos, nd


# --- two-particle kernels -----------------------------------------------------

cdef int _fv_refine(bitgen_t *rng, double a1, double b1, double a2, double b2,
                    double s, int *sub_out, double *val_out, double *i1_out,
                    double *i2_out, double *iv_out, long long *nd_out) noexcept:
    """Joint conditional sub-walk of one flagged step; _fvkern.fv_refine_py.

    Returns who (0 none, else hitting particle); outputs are assigned, not
    accumulated.
    """
    cdef double ds = s / 64.0
    cdef double x1 = a1, x2 = a2
    cdef double i1 = 0.0, i2 = 0.0, iv = 0.0
    cdef long long nd = 0
    cdef int j, rem
    cdef double c, sd, u, n1, n2, q1, q2, m1, m2, prod
    cdef bint hit1, hit2
    cdef int who = 0, sub = -1
    cdef double val = 0.0
    n1 = b1
    n2 = b2
    for j in range(64):
        if j < 63:
            rem = 64 - j
            c = 1.0 / rem
            sd = sqrt(ds * (rem - 1.0) * c)
            u = rng.next_double(rng.state)
            if u < UF:
                u = UF
            n1 = x1 + (b1 - x1) * c + sd * ndtri(u)
            u = rng.next_double(rng.state)
            if u < UF:
                u = UF
            n2 = x2 + (b2 - x2) * c + sd * ndtri(u)
            nd += 2
        else:
            n1 = b1
            n2 = b2
        q1 = x1 * x1
        q2 = x2 * x2
        m1 = n1 * n1
        m2 = n2 * n2
        if m1 > 0.0:
            i1 += ds * 0.5 * (1.0 / q1 + 1.0 / m1)
        else:
            i1 += INFINITY
        if m2 > 0.0:
            i2 += ds * 0.5 * (1.0 / q2 + 1.0 / m2)
        else:
            i2 += INFINITY
        iv += ds * 0.5 * (1.0 / (q1 + q2) + 1.0 / (m1 + m2))
        hit1 = x1 <= 0.0 or n1 <= 0.0
        if not hit1:
            prod = x1 * n1
            if prod < FV_HALF_Q * ds:
                u = rng.next_double(rng.state)
                nd += 1
                hit1 = u < exp(-2.0 * prod / ds)
        if hit1:
            val = n2 if n2 > 0.0 else (-n2 if n2 < 0.0 else 1e-300)
            who = 1
            sub = j
            break
        hit2 = x2 <= 0.0 or n2 <= 0.0
        if not hit2:
            prod = x2 * n2
            if prod < FV_HALF_Q * ds:
                u = rng.next_double(rng.state)
                nd += 1
                hit2 = u < exp(-2.0 * prod / ds)
        if hit2:
            val = n1 if n1 > 0.0 else (-n1 if n1 < 0.0 else 1e-300)
            who = 2
            sub = j
            break
        x1 = n1
        x2 = n2
    sub_out[0] = sub
    val_out[0] = val
    i1_out[0] = i1
    i2_out[0] = i2
    iv_out[0] = iv
    nd_out[0] = nd
    return who


def fv_first_branch(object bitgen, Py_ssize_t n, double dt, double y0,
                    long long max_rounds=50_000_000):
    """First branch value and time per pair, lockstep; fv_first_branch_py.

    Returns (values, times, draws).
    """
    cdef bitgen_t *rng = _bg(bitgen)
    cdef double dt0 = dt * y0 * y0
    cdef double denom = FV_GROW_MARGIN * dt0
    out_y_arr = np.empty(n)
    out_t_arr = np.empty(n)
    cdef double[::1] out_y = out_y_arr
    cdef double[::1] out_t = out_t_arr
    idx_arr = np.arange(n, dtype=np.int64)
    cdef long long[::1] idx = idx_arr
    x1_arr = np.full(n, y0)
    x2_arr = np.full(n, y0)
    t_arr = np.zeros(n)
    b1_arr = np.empty(n)
    b2_arr = np.empty(n)
    s_arr = np.empty(n)
    done_arr = np.empty(n, dtype=np.uint8)
    cdef double[::1] x1 = x1_arr, x2 = x2_arr, t = t_arr
    cdef double[::1] b1 = b1_arr, b2 = b2_arr, sv = s_arr
    cdef unsigned char[::1] done = done_arr
    cdef Py_ssize_t m = n, i, w
    cdef long long rounds = 0, draws = 0, nd = 0, k
    cdef double d, gf, g, s, rt, u, lim, val, d1, d2, dv
    cdef int who, hsub
    while m > 0:
        rounds += 1
        if rounds > max_rounds:
            raise BudgetExceededError(
                f"{m} pairs unbranched after {max_rounds} rounds")
        for i in range(m):
            d = x1[i] if x1[i] < x2[i] else x2[i]
            gf = floor(d * d / denom)
            if gf < 1.0:
                gf = 1.0
            elif gf > FV_GROW_CAP:
                gf = FV_GROW_CAP
            s = gf * dt0
            sv[i] = s
            rt = sqrt(s)
            u = rng.next_double(rng.state)
            if u < UF:
                u = UF
            b1[i] = x1[i] + rt * ndtri(u)
            u = rng.next_double(rng.state)
            if u < UF:
                u = UF
            b2[i] = x2[i] + rt * ndtri(u)
        draws += 2 * m
        for i in range(m):
            done[i] = 0
            s = sv[i]
            lim = FV_HALF_Q * s
            if (b1[i] <= 0.0 or b2[i] <= 0.0
                    or x1[i] * b1[i] < lim or x2[i] * b2[i] < lim):
                nd = 0
                who = _fv_refine(rng, x1[i], b1[i], x2[i], b2[i], s,
                                 &hsub, &val, &d1, &d2, &dv, &nd)
                draws += nd
                if who != 0:
                    k = idx[i]
                    out_y[k] = val
                    out_t[k] = t[i] + (hsub + 1) * (s / 64.0)
                    done[i] = 1
        w = 0
        for i in range(m):
            if not done[i]:
                idx[w] = idx[i]
                x1[w] = b1[i]
                x2[w] = b2[i]
                t[w] = t[i] + sv[i]
                w += 1
        m = w
    return out_y_arr, out_t_arr, draws


def fv_chain(object bitgen, double y0, double dt, long long max_branches,
             double t_max=float("inf"), long long record_stride=1,
             long long max_steps=1_000_000_000):
    """One recorded two-particle trajectory with clocks; fv_chain_py."""
    cdef bitgen_t *rng = _bg(bitgen)
    cdef double x1 = y0, x2 = y0
    cdef double t = 0.0
    cdef double dtk = dt * y0 * y0
    branch_t = [0.0]
    branch_y = [y0]
    labels = []
    rec_t = [0.0]
    rec_x1 = [y0]
    rec_x2 = [y0]
    rec_b = [0]
    sig_t = [0.0]
    sig_c = [0.0]
    phi_t = [0.0]
    phi_c = [0.0]
    pend_t = []
    pend_a1 = []
    pend_a2 = []
    cdef double a1 = 0.0, a2 = 0.0
    cdef double phi_total = 0.0, sigma_total = 0.0, base
    cdef double zb[4096]
    cdef int zpos = 4096
    cdef long long draws = 0, steps = 0, n_br = 1, since_rec = 0, nd = 0
    cdef long long stride = record_stride
    cdef double d, gf, s, rt, b1, b2, lim, u, val, i1, i2, iv, tk
    cdef int who, hsub, k
    cdef Py_ssize_t jj, npend
    if stride < 1:
        stride = 0  # records only t=0, branches and the end
    while n_br <= max_branches and t < t_max:
        steps += 1
        if steps > max_steps:
            raise BudgetExceededError(f"chain exceeded {max_steps} steps")
        if zpos >= 4096:
            for k in range(4096):
                u = rng.next_double(rng.state)
                if u < UF:
                    u = UF
                zb[k] = ndtri(u)
            draws += 4096
            zpos = 0
        d = x1 if x1 < x2 else x2
        gf = d * d / (FV_GROW_MARGIN * dtk)
        if gf < 1.0:
            gf = 1.0
        elif gf >= FV_GROW_CAP:
            gf = FV_GROW_CAP
        else:
            gf = floor(gf)
        s = gf * dtk
        rt = sqrt(s)
        b1 = x1 + rt * zb[zpos]
        b2 = x2 + rt * zb[zpos + 1]
        zpos += 2
        lim = FV_HALF_Q * s
        if b1 <= 0.0 or b2 <= 0.0 or x1 * b1 < lim or x2 * b2 < lim:
            nd = 0
            who = _fv_refine(rng, x1, b1, x2, b2, s,
                             &hsub, &val, &i1, &i2, &iv, &nd)
            draws += nd
            if who != 0:
                tk = t + (hsub + 1) * (s / 64.0)
                a1 += i1
                a2 += i2
                phi_total += iv
                base = sigma_total
                sigma_total += a2 if who == 1 else a1
                npend = len(pend_t)
                for jj in range(npend):
                    sig_t.append(pend_t[jj])
                    if who == 1:
                        sig_c.append(base + <double> pend_a2[jj])
                    else:
                        sig_c.append(base + <double> pend_a1[jj])
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
                n_br += 1
                x1 = val
                x2 = val
                t = tk
                dtk = dt * val * val
                a1 = 0.0
                a2 = 0.0
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
        x1 = b1
        x2 = b2
        t += s
        since_rec += 1
        if stride != 0 and since_rec >= stride:
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
    if <double> rec_t[len(rec_t) - 1] != t:
        rec_t.append(t)
        rec_x1.append(x1)
        rec_x2.append(x2)
        rec_b.append(0)
    if <double> phi_t[len(phi_t) - 1] != t:
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
