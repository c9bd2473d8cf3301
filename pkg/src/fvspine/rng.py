"""Counter-based random source with exact save/restore and fixed draw costs.

Every stochastic routine in the package pulls uniforms from a Philox stream
keyed by (seed, stream_id).  One replica owns one stream.  Costs are pinned:
a gaussian is one uniform through the normal quantile, a step factor is one
uniform, a strip exit is two, a bridge-crossing decision is one unless an
endpoint is already nonpositive.  The counter counts uniforms, and restoring
a saved state replays the stream exactly (Philox advances four doubles per
counter tick, so restore = advance(n // 4) plus n % 4 discards).

Bulk kernels consume the stream in buffered blocks; a source handed to one
should be treated as exhausted afterwards (its counter is synced to the real
block consumption, so saved states remain honest).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .constants import COIN_FLOOR, STRIP_CENTER, STRIP_WIDTH, UNIFORM_FLOOR
from . import tables


@dataclass(frozen=True)
class ExitSample:
    """One strip excursion: time to the wall and which wall was hit."""
    duration: float
    side: str  # "top" or "bottom"


class RandomSource:
    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.draws = 0
        self._bitgen = np.random.Philox(
            key=np.array([self.seed, self.stream_id], dtype=np.uint64))
        self._gen = np.random.Generator(self._bitgen)

    # -- stream plumbing ---------------------------------------------------

    def uniform(self) -> float:
        self.draws += 1
        return float(self._gen.random())

    def uniforms(self, n: int) -> np.ndarray:
        self.draws += int(n)
        return self._gen.random(int(n))

    def bitgen(self):
        return self._bitgen

    def generator(self) -> np.random.Generator:
        """Raw generator for bulk kernels; caller must sync_draws afterwards."""
        return self._gen

    def sync_draws(self, n: int) -> None:
        """Record n uniforms consumed directly off the bit generator."""
        self.draws += int(n)

    def state(self) -> dict:
        return {"seed": self.seed, "stream_id": self.stream_id, "draws": self.draws}

    @classmethod
    def from_state(cls, state: dict) -> "RandomSource":
        src = cls(state["seed"], state.get("stream_id", 0))
        n = int(state.get("draws", 0))
        if n:
            src._bitgen.advance(n // 4)
            for _ in range(n % 4):
                src._gen.random()
            src.draws = n
        return src

    # -- primitive draws ----------------------------------------------------

    def gaussian(self, mean: float = 0.0, sd: float = 1.0) -> float:
        u = self.uniform()
        if u < UNIFORM_FLOOR:
            u = UNIFORM_FLOOR
        return mean + sd * float(ndtri(u))

    def gaussians(self, n: int, mean: float = 0.0, sd: float = 1.0) -> np.ndarray:
        u = self.uniforms(n)
        np.maximum(u, UNIFORM_FLOOR, out=u)
        return mean + sd * ndtri(u)

    def bridge_hits_zero(self, x0: float, x1: float, dt: float) -> bool:
        """Does a Brownian bridge between positive endpoints touch 0?

        Nonpositive endpoints count as hits and cost no draw; otherwise the
        crossing coin is always spent, keeping consumption reproducible.
        """
        if dt <= 0.0:
            raise ValueError("bridge interval must have dt > 0")
        if x0 <= 0.0 or x1 <= 0.0:
            return True
        p = math.exp(-2.0 * x0 * x1 / dt)
        return self.uniform() < p

    def sample_step_factor(self) -> float:
        """One draw from the branch-value law (one uniform)."""
        u = self.uniform()
        return xi_from_p(max(u, UNIFORM_FLOOR))

    def sample_strip_exit(self, method: str = "table", dt: float = 1e-4) -> ExitSample:
        """Duration and side of one centered strip excursion (two uniforms).

        method="table" inverts the analytic duration law; "simulation" walks
        a discrete path until it leaves the strip (validation path, draw
        consumption depends on the path).
        """
        if method == "table":
            u1 = self.uniform()
            u2 = self.uniform()
            dur = exit_from_p(max(u1, UNIFORM_FLOOR))
            return ExitSample(dur, "top" if u2 < 0.5 else "bottom")
        if method == "simulation":
            return self._exit_by_walk(dt)
        raise ValueError(f"unknown exit sampling method: {method!r}")

    def _exit_by_walk(self, dt: float) -> ExitSample:
        # Bridge coins against both walls kill the O(sqrt(dt)) boundary bias
        # of a plain sign check, leaving the duration biased only by the
        # end-of-step reporting convention, O(dt).
        sd = math.sqrt(dt)
        trig = -0.5 * math.log(COIN_FLOOR) * dt  # product a*b below this gets a coin
        block = 4096
        z = STRIP_CENTER
        t = 0.0
        while True:
            g = self.gaussians(block, 0.0, sd)
            path = z + np.cumsum(g)
            prev = np.empty_like(path)
            prev[0] = z
            prev[1:] = path[:-1]
            above = path >= STRIP_WIDTH
            out = (path <= 0.0) | above
            n_direct = int(np.argmax(out)) if out.any() else block
            bot = prev[:n_direct] * path[:n_direct] < trig
            top = (STRIP_WIDTH - prev[:n_direct]) * (STRIP_WIDTH - path[:n_direct]) < trig
            for i in np.flatnonzero(bot | top):
                # pinned order within a step: bottom coin, then top coin
                if bot[i] and self.uniform() < math.exp(
                        -2.0 * prev[i] * path[i] / dt):
                    return ExitSample(t + (int(i) + 1) * dt, "bottom")
                if top[i] and self.uniform() < math.exp(
                        -2.0 * (STRIP_WIDTH - prev[i]) * (STRIP_WIDTH - path[i]) / dt):
                    return ExitSample(t + (int(i) + 1) * dt, "top")
            if n_direct < block:
                side = "top" if above[n_direct] else "bottom"
                return ExitSample(t + (n_direct + 1) * dt, side)
            z = float(path[-1])
            t += block * dt


# -- shared inverse-law evaluators (table mid-range, exact Newton tails) ----

def xi_from_p(p: float) -> float:
    tab = tables.xi_table()
    if p < tab.p_lo or p > tab.p_hi:
        return tables.xi_tail_quantile(p)
    return tables.table_eval_scalar(tab, p)


def exit_from_p(p: float) -> float:
    tab = tables.exit_table()
    if p < tab.p_lo or p > tab.p_hi:
        return tables.exit_tail_quantile(p)
    return tables.table_eval_scalar(tab, p)
