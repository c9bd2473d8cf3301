"""Strip-and-jump representation of the spine in its own brownian clock.

The log spine, run in the strip clock r, is a brownian motion on the strip
(0, pi/2) in its second coordinate; each wall hit adds log(sqrt 2) to the
first coordinate and restarts the second at the center.  The first
coordinate read at wall hits is then a renewal-reward walk whose long-run
slope is the drift constant kappa.  A weighted clock h accrues the inverse
squared sine (or cosine, per exit side) along the way; its per-excursion
mean is the gap constant that converts jump counts into intrinsic time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import _stripkern, backend, stats
from .constants import JUMP_RATE, KAPPA, LOG_SQRT2
from .errors import InsufficientDataError


@dataclass
class StripTrace:
    """Per-jump state of one strip run.

    Arrays are indexed by jump number (first jump at index 0).  ``r`` is the
    strip-clock time of each jump, ``z1`` the first coordinate right after
    it, ``h`` the weighted clock at it, ``side`` +1 for top exits and -1 for
    bottom, ``bm`` the brownian part of each z1 increment.  ``steps`` counts
    base grid steps actually consumed, ``cap_hits`` the weight evaluations
    clipped at the cap on the side that was realized.
    """
    delta: float
    u_max: float
    jumps_enabled: bool
    r: np.ndarray
    z1: np.ndarray
    h: np.ndarray
    side: np.ndarray
    bm: np.ndarray
    steps: float
    cap_hits: int
    draws: int
    seed_manifest: dict = field(default_factory=dict)

    @property
    def n_jumps(self) -> int:
        return int(self.r.size)


@dataclass(frozen=True)
class SpineCheckpoint:
    """Spine value at its k-th branch, located on both clocks."""
    index: int
    log_value: float
    r: float
    h: float


def simulate_strip(rs, u_max: float, delta: float = 1e-4,
                   jumps_enabled: bool = True) -> StripTrace:
    """Run the strip process until the first jump at or past u_max.

    delta is the base grid in the strip clock; wall neighborhoods are
    refined 32-fold with a bridge fill so exit times resolve at delta/32
    and the singular weight is integrated on the fine grid.
    """
    u_max = float(u_max)
    delta = float(delta)
    if u_max <= 0:
        raise ValueError("u_max must be positive")
    if not 0 < delta <= 1e-2:
        raise ValueError("delta must lie in (0, 1e-2]")
    manifest = {"seed": rs.seed, "stream_id": rs.stream_id}
    out = _stripkern.strip_drive(rs, backend.strip_scan(), u_max, delta,
                                 jumps=jumps_enabled)
    # kernel encodes bottom exits as 0; publish them as -1
    side = np.where(out["side"] == 1, 1, -1).astype(np.int8)
    return StripTrace(
        delta=delta, u_max=u_max, jumps_enabled=jumps_enabled,
        r=out["r"], z1=out["z1"], h=out["h"], side=side,
        bm=out["bm"], steps=out["steps"], cap_hits=out["cap_hits"],
        draws=out["draws"], seed_manifest=manifest)


def spine_checkpoints(trace: StripTrace) -> list[SpineCheckpoint]:
    """Branch-time spine values implied by a jump-enabled trace.

    The first coordinate right after jump k is the log of sqrt(2) times the
    k-th surviving value, so the spine log value at the branch is z1 minus
    log(sqrt 2).
    """
    if not trace.jumps_enabled:
        raise ValueError("checkpoints need a jump-enabled trace")
    if trace.n_jumps < 1:
        raise InsufficientDataError("trace records no jumps")
    return [
        SpineCheckpoint(index=k + 1,
                        log_value=float(trace.z1[k]) - LOG_SQRT2,
                        r=float(trace.r[k]), h=float(trace.h[k]))
        for k in range(trace.n_jumps)
    ]


def renewal_drift_estimate(trace: StripTrace,
                           n_batches: int = 20) -> stats.EstimateReport:
    """Long-run slope of z1 against the strip clock, with a batch-means error.

    Needs a horizon of at least 100 clock units so the batch means are
    near-independent; the point estimate is the endpoint ratio.
    """
    if trace.n_jumps < n_batches:
        raise InsufficientDataError(
            f"need at least {n_batches} jumps, got {trace.n_jumps}")
    r_end = float(trace.r[-1])
    if r_end < 100.0:
        raise InsufficientDataError(
            f"horizon {r_end:.1f} too short, need 100 clock units")
    estimate = float(trace.z1[-1]) / r_end
    edges = np.linspace(0, trace.n_jumps, n_batches + 1).astype(int)
    r_full = np.concatenate([[0.0], trace.r])
    z_full = np.concatenate([[0.0], trace.z1])
    slopes = (z_full[edges[1:]] - z_full[edges[:-1]]) / \
        (r_full[edges[1:]] - r_full[edges[:-1]])
    se = float(slopes.std(ddof=1) / np.sqrt(n_batches))
    return stats.EstimateReport(
        estimate=estimate, stderr=se, n=trace.n_jumps,
        method="strip-endpoint-slope",
        seed_manifest=dict(trace.seed_manifest),
        extras={"r_end": r_end, "kappa_ref": KAPPA,
                "jump_rate": trace.n_jumps / r_end,
                "jump_rate_ref": JUMP_RATE,
                "cap_hits": trace.cap_hits})


def excursion_clock_mean() -> float:
    """Mean weighted-clock gain per excursion, by quadrature.

    An excursion starts at the center with occupation density min(z, pi/2-z);
    conditioning on a top exit tilts it by the harmonic ratio 4z/pi and puts
    the weight 1/sin^2 at height z.  The bottom case is its mirror image, so
    the conditional mean is also the unconditional one.
    """
    val, _ = integrate.quad(
        lambda z: z * min(z, math.pi / 2.0 - z) / math.sin(z) ** 2,
        0.0, math.pi / 2.0, points=[math.pi / 4.0], limit=100)
    return 4.0 / math.pi * val


def discriminator_statistic(u_nodes, g_nodes, window) -> float:
    """Max of g/u over the nodes whose u falls inside the window.

    g is a log path read on an intrinsic clock u; the statistic separates
    the two growth classes because their g(u)/u limits differ.
    """
    u = np.asarray(u_nodes, dtype=float)
    g = np.asarray(g_nodes, dtype=float)
    if u.shape != g.shape:
        raise ValueError("node arrays must match in shape")
    lo, hi = float(window[0]), float(window[1])
    if not 0 < lo < hi:
        raise ValueError("window must satisfy 0 < lo < hi")
    mask = (u >= lo) & (u <= hi)
    if not mask.any():
        raise InsufficientDataError("no nodes inside the window")
    return float(np.max(g[mask] / u[mask]))


def classify(statistic: float, threshold: float) -> str:
    """Label a statistic against a threshold; above means spine."""
    return "spine" if statistic > threshold else "bessel"
