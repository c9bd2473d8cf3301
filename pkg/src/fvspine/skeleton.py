"""Branch-value skeleton: the multiplicative chain Y_n = Y_{n-1} xi_n.

Two generation routes must agree in law: drawing each factor directly from
its quantile (one uniform per step), or composing log sqrt(2) with a
brownian displacement over an independent strip-exit duration (three
uniforms per step).  Chains are stored in log scale; the level itself
overflows a double once n log(sqrt 2) passes ~709, so ``values`` is a
convenience view, not the storage format.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, stats
from .constants import LOG_SQRT2
from .errors import InsufficientDataError


class Method(enum.Enum):
    XI_DIRECT = "xi-direct"
    RENEWAL_STEP = "renewal-step"


@dataclass
class SkeletonChain:
    log_values: np.ndarray      # (n+1,) starting at log Y_0 = 0
    log_increments: np.ndarray  # (n,)
    method: Method

    @property
    def values(self) -> np.ndarray:
        """Y_n itself; overflows to inf once the level passes ~709 nats."""
        return np.exp(self.log_values)


def simulate_skeleton(rs, n: int, method: Method = Method.XI_DIRECT) -> SkeletonChain:
    n = int(n)
    if n < 1:
        raise ValueError("need at least one step")
    renewal = method is Method.RENEWAL_STEP
    incr, _, _ = _kernels.skeleton_logwalk(rs.generator(), n, renewal)
    rs.sync_draws((3 if renewal else 1) * n)
    log_values = np.empty(n + 1)
    log_values[0] = 0.0
    np.cumsum(incr, out=log_values[1:])
    return SkeletonChain(log_values=log_values, log_increments=incr, method=method)


def min_log_until_barrier(rs, barrier: float, max_steps: int = 10_000_000) -> float:
    """Smallest log level of one chain run until log Y_n first exceeds barrier."""
    if barrier <= 0.0:
        raise ValueError("barrier must be positive")
    mins, steps = _kernels.min_barrier_lockstep(rs.generator(), 1, barrier,
                                                max_steps=max_steps)
    rs.sync_draws(int(steps[0]))
    return math.log(float(mins[0]))


def min_log_batch(rs, replicas: int, barrier: float,
                  max_steps: int = 10_000_000) -> np.ndarray:
    """Vector version of min_log_until_barrier over independent chains."""
    if barrier <= 0.0:
        raise ValueError("barrier must be positive")
    mins, steps = _kernels.min_barrier_lockstep(rs.generator(), int(replicas),
                                                barrier, max_steps=max_steps)
    rs.sync_draws(int(steps.sum()))
    return np.log(mins)


def tail_curve(rs, replicas: int, t_grid, barrier: float | None = None):
    """Survival of the running log-minimum below -t across a t grid.

    Returns one EstimateReport per t with the survival estimate and, in
    extras, the compensated level c_hat = exp(t) * survival whose stability
    in t exhibits the unit tail exponent.  The barrier must clear the
    deepest t by 10 so barrier-crossing truncation cannot bias the curve.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.size == 0 or (t <= 0).any():
        raise ValueError("t_grid must be positive")
    if barrier is None:
        barrier = float(t.max()) + 10.0
    if barrier < float(t.max()) + 10.0:
        raise ValueError("barrier must exceed max(t_grid) + 10")
    replicas = int(replicas)
    if replicas < 1:
        raise InsufficientDataError("need at least one replica")
    mins = min_log_batch(rs, replicas, barrier)
    reports = []
    for ti in t:
        hits = int((mins < -ti).sum())
        p = hits / replicas
        se = math.sqrt(p * (1.0 - p) / replicas)
        c = math.exp(ti) * p
        reports.append(stats.EstimateReport(
            estimate=p, stderr=se, n=replicas, method="barrier-min-survival",
            seed_manifest={"seed": rs.seed, "stream_id": rs.stream_id},
            extras={"t": float(ti), "c_hat": c, "c_stderr": math.exp(ti) * se,
                    "hits": hits, "barrier": barrier},
        ))
    return reports


def log_mean_drift() -> float:
    """Analytic per-step drift of the log chain."""
    return LOG_SQRT2
