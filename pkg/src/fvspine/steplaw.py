"""Closed-form and quadrature ground truth for the branch step-factor law.

The step factor xi is the value of the spine at the first branch time when the
system starts from 1.  Its density is

    f(y) = (2/pi) * [ 1/((1-y)^2+1) - 1/((1+y)^2+1) ],   y > 0,

with CDF F(y) = (2/pi) [arctan(y-1) - arctan(y+1) + pi/2].  Useful facts used
by tests: F(sqrt 2) = 1/2, E[1/xi] = 1, E[ln xi] = ln sqrt 2,
1 - F(y) = (2/pi) arctan(2/y^2).

Also hosts the tail-exponent root (the positive gamma with E[xi^-gamma] = 1)
and the all-time minimum law of the 3-d Bessel process,
P(inf X <= a | X_0 = x0) = a/x0.

Everything here is deterministic and Monte-Carlo-free; the sampling modules
are tested against these functions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate, optimize

from .errors import DivergentIntegralError

_TWO_OVER_PI = 2.0 / math.pi


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the adaptive quadratures below."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class RootReport:
    root: float
    residual: float
    iterations: int


def xi_density(y: float) -> float:
    """Density of the step factor; 0 for y <= 0."""
    if y <= 0.0:
        return 0.0
    return _TWO_OVER_PI * (1.0 / ((1.0 - y) ** 2 + 1.0) - 1.0 / ((1.0 + y) ** 2 + 1.0))


def xi_cdf(y: float) -> float:
    """CDF of the step factor; 0 for y < 0, monotone to 1 at infinity."""
    if y < 0.0:
        return 0.0
    return _TWO_OVER_PI * (math.atan(y - 1.0) - math.atan(y + 1.0) + math.pi / 2.0)


def xi_survival(y: float) -> float:
    """1 - xi_cdf(y), computed without cancellation: (2/pi) arctan(2/y^2)."""
    if y <= 0.0:
        return 1.0
    return _TWO_OVER_PI * math.atan(2.0 / (y * y))


def xi_quantile(p: float) -> float:
    """Inverse CDF: the y with |xi_cdf(y) - p| < 1e-12.

    Bisection from a bracket, then Newton polish.  The bracket starts at
    (0, 1e6) and the upper end doubles until it covers p: double-precision p
    can sit above F(1e6) ~ 1 - 6.4e-13, where quantiles reach ~1e8.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    lo, hi = 0.0, 1e6
    while xi_cdf(hi) < p:
        hi *= 2.0
        if hi > 1e18:  # pragma: no cover - unreachable for double p < 1
            raise RuntimeError("quantile bracket failed to close")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if xi_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    y = 0.5 * (lo + hi)
    # Newton polish on F(y) = p (or the survival form in the upper tail,
    # where F is a difference of numbers near 1)
    for _ in range(40):
        if p > 0.9:
            err = (1.0 - p) - xi_survival(y)
        else:
            err = xi_cdf(y) - p
        if abs(err) < 1e-12:
            break
        d = xi_density(y)
        if d <= 0.0:
            break
        step = err / d
        if abs(step) > 0.5 * y:
            step = math.copysign(0.5 * y, step)
        y -= step
    return y


def _tail_integrand(u: float, g: float) -> float:
    # substitution y = 1/u maps (1, inf) to (0, 1); the integrand is smooth
    # because f(1/u) ~ (8/pi) u^3 near u = 0
    return u ** (g - 2.0) * xi_density(1.0 / u)


def xi_neg_moment(gamma: float, q: QuadratureSpec | None = None) -> float:
    """E[xi^-gamma] by adaptive quadrature, split at y=1 with a 1/y tail map.

    Diverges (logarithmically at the origin) when gamma >= 2: rejected.
    """
    q = q or QuadratureSpec()
    if gamma >= 2.0:
        raise DivergentIntegralError("E[xi^-gamma] diverges for gamma >= 2")
    body, _ = integrate.quad(
        lambda y: y ** (-gamma) * xi_density(y), 0.0, 1.0,
        epsabs=q.abs_tol, epsrel=q.rel_tol, limit=q.max_subdivisions,
    )
    tail, _ = integrate.quad(
        _tail_integrand, 0.0, 1.0, args=(gamma,),
        epsabs=q.abs_tol, epsrel=q.rel_tol, limit=q.max_subdivisions,
    )
    return body + tail


def xi_log_mean(q: QuadratureSpec | None = None) -> float:
    """E[ln xi] by the same split quadrature (equals ln sqrt 2)."""
    q = q or QuadratureSpec()
    body, _ = integrate.quad(
        lambda y: math.log(y) * xi_density(y), 0.0, 1.0,
        epsabs=q.abs_tol, epsrel=q.rel_tol, limit=q.max_subdivisions,
    )
    tail, _ = integrate.quad(
        lambda u: -math.log(u) * xi_density(1.0 / u) / (u * u), 0.0, 1.0,
        epsabs=q.abs_tol, epsrel=q.rel_tol, limit=q.max_subdivisions,
    )
    return body + tail


def xi_log_second_moment(q: QuadratureSpec | None = None) -> float:
    """E[(ln xi)^2]; equals (pi/4)^2 + (ln sqrt 2)^2 (cross-module identity)."""
    q = q or QuadratureSpec()
    body, _ = integrate.quad(
        lambda y: math.log(y) ** 2 * xi_density(y), 0.0, 1.0,
        epsabs=q.abs_tol, epsrel=q.rel_tol, limit=q.max_subdivisions,
    )
    tail, _ = integrate.quad(
        lambda u: math.log(u) ** 2 * xi_density(1.0 / u) / (u * u), 0.0, 1.0,
        epsabs=q.abs_tol, epsrel=q.rel_tol, limit=q.max_subdivisions,
    )
    return body + tail


def solve_tail_exponent(q: QuadratureSpec | None = None) -> RootReport:
    """Positive root of E[xi^-gamma] = 1 on (0, 2).

    m(gamma) = E[xi^-gamma] is convex with m(0) = 1 and m'(0) < 0, so the
    positive root is the single crossing in (0.05, 1.9); Brent bracketing.
    """
    q = q or QuadratureSpec()
    evals = [0]

    def shifted(g: float) -> float:
        evals[0] += 1
        return xi_neg_moment(g, q) - 1.0

    root, res = optimize.brentq(shifted, 0.05, 1.9, xtol=1e-12, rtol=8.9e-16,
                                full_output=True)
    return RootReport(root=float(root), residual=shifted(root),
                      iterations=res.iterations)


def bessel_min_cdf(a: float, x0: float) -> float:
    """P(all-time infimum of a 3-d Bessel process from x0 is <= a) = a/x0."""
    if x0 <= 0.0:
        raise ValueError("x0 must be positive")
    if a <= 0.0:
        return 0.0
    return min(a / x0, 1.0)
