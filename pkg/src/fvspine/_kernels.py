"""Bulk sampling kernels, reference NumPy implementations.

Draw protocols are pinned so the compiled backend can reproduce them bit for
bit:

* block samplers consume uniforms in sample order (interleaved per sample
  when a sample costs several draws);
* lockstep batch kernels run all live lanes one round at a time, drawing for
  the live lanes in ascending lane order within each round;
* table lookups use only comparisons and plain arithmetic, and out-of-range
  draws fall through to closed-form tail inversions that call nothing beyond
  libm scalars, which the compiled backend shares.

Vector transcendentals (np.log etc.) appear only in kernels that have no
compiled twin; twinned code paths avoid them because numpy's SIMD routines
may differ from libm in the last ulp.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtri

from . import tables
from .constants import LOG_SQRT2, UNIFORM_FLOOR
from .errors import BudgetExceededError

BLOCK = 4096  # uniforms per pre-drawn block in block-protocol kernels


def _table_with_tails(pack, p, tail_fn):
    """Evaluate a quantile table on p in (0,1), exact tails outside."""
    tab = pack
    out = tables.table_eval_vector(tab, np.clip(p, tab.p_lo, tab.p_hi))
    bad = (p < tab.p_lo) | (p > tab.p_hi)
    if bad.any():
        for i in np.flatnonzero(bad):
            out[i] = tail_fn(float(p[i]))
    return out


def xi_block(gen: np.random.Generator, n: int) -> np.ndarray:
    """n step factors, one uniform each."""
    p = gen.random(int(n))
    np.maximum(p, UNIFORM_FLOOR, out=p)
    return _table_with_tails(tables.xi_table(), p, tables.xi_tail_quantile)


def exit_block(gen: np.random.Generator, n: int):
    """n strip exits, two uniforms each (duration, side), sample-major.

    Returns (durations, top) with top a boolean array; True when the second
    uniform is below 1/2, matching the scalar sampler.
    """
    u = gen.random(2 * int(n))
    p = np.maximum(u[0::2], UNIFORM_FLOOR)
    dur = _table_with_tails(tables.exit_table(), p, tables.exit_tail_quantile)
    top = u[1::2] < 0.5
    return dur, top


def skeleton_logwalk(gen: np.random.Generator, n: int, renewal: bool):
    """Log-increments of n skeleton steps.

    Direct mode costs one uniform per step (a step factor through its
    quantile); renewal mode costs three (exit duration, exit side, one
    gaussian) and produces log(sqrt 2) plus a brownian displacement over the
    exit duration.  Returns (log_increments, durations, top) with the last
    two None in direct mode.
    """
    n = int(n)
    if not renewal:
        return np.log(xi_block(gen, n)), None, None
    u = gen.random(3 * n)
    p = np.maximum(u[0::3], UNIFORM_FLOOR)
    dur = _table_with_tails(tables.exit_table(), p, tables.exit_tail_quantile)
    top = u[1::3] < 0.5
    g = ndtri(np.maximum(u[2::3], UNIFORM_FLOOR))
    return LOG_SQRT2 + np.sqrt(dur) * g, dur, top


def min_barrier_lockstep(gen: np.random.Generator, n_chains: int,
                         barrier: float, max_steps: int = 10_000_000):
    """Running minimum of n skeleton chains until the level exceeds barrier.

    Works multiplicatively (the chain value and its running minimum stay in
    double range for any reasonable barrier) so the compiled twin needs no
    vector logarithm; callers take log of the returned minima.  One uniform
    per live chain per round, live chains in ascending order.

    Returns (min_mult, steps) where min_mult[i] is the smallest chain value
    seen by chain i (its log is the quantity of interest) and steps[i] the
    number of steps chain i took to clear the barrier.
    """
    n = int(n_chains)
    lim = math.exp(barrier)
    tab = tables.xi_table()
    idx = np.arange(n)
    val = np.ones(n)
    mins = np.ones(n)
    out_min = np.ones(n)
    out_steps = np.zeros(n, dtype=np.int64)
    step = 0
    while idx.size:
        step += 1
        if step > max_steps:
            raise BudgetExceededError(
                f"{idx.size} chains below barrier {barrier} after {max_steps} steps")
        p = gen.random(idx.size)
        np.maximum(p, UNIFORM_FLOOR, out=p)
        xi = _table_with_tails(tab, p, tables.xi_tail_quantile)
        val *= xi
        np.minimum(mins, val, out=mins)
        done = val > lim
        if done.any():
            out_min[idx[done]] = mins[done]
            out_steps[idx[done]] = step
            keep = ~done
            idx = idx[keep]
            val = val[keep]
            mins = mins[keep]
    return out_min, out_steps
