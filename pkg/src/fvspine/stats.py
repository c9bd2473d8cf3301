"""Estimators and test statistics shared by the experiment drivers.

Everything returns plain numbers or small dataclasses; the reporting layer
decides how results are serialized.  Preconditions raise rather than warn:
a sample that is too small for the asymptotics here is a configuration
error, not a statistical finding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .errors import InsufficientDataError


@dataclass
class EstimateReport:
    estimate: float
    stderr: float
    n: int
    method: str
    seed_manifest: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)


@dataclass
class LilReport:
    times: np.ndarray
    stats: np.ndarray
    running_max: np.ndarray
    n_skipped: int


def mean_ci(samples, method: str = "sample-mean") -> EstimateReport:
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise InsufficientDataError("mean_ci needs at least 2 samples")
    if not np.isfinite(x).all():
        raise ValueError("mean_ci got non-finite samples")
    return EstimateReport(
        estimate=float(x.mean()),
        stderr=float(x.std(ddof=1) / math.sqrt(x.size)),
        n=int(x.size),
        method=method,
    )


def ks_one_sample(samples, cdf):
    """KS statistic and p-value against a callable CDF.

    Asymptotic Kolmogorov p-value from n = 100 up, the exact finite-n
    distribution below that.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 10:
        raise InsufficientDataError("ks_one_sample needs at least 10 samples")
    if np.isnan(x).any():
        raise ValueError("ks_one_sample got NaN samples")
    res = sps.kstest(x, cdf, method="asymp" if x.size >= 100 else "exact")
    return float(res.statistic), float(res.pvalue)


def ks_two_sample(a, b):
    """Two-sample KS; asymptotic p-value for the sizes used here."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if min(a.size, b.size) < 10:
        raise InsufficientDataError("ks_two_sample needs at least 10 per sample")
    if np.isnan(a).any() or np.isnan(b).any():
        raise ValueError("ks_two_sample got NaN samples")
    res = sps.ks_2samp(a, b, method="asymp")
    return float(res.statistic), float(res.pvalue)


def exp_tail_fit(t_values, survival, stderr):
    """Weighted fit of log(survival) = intercept + slope * t.

    Weights are delta-method variances of the log; cells with no hits, no
    reported error, or fewer than about 20 hits (reconstructed from the
    binomial relation n = s(1-s)/se^2) are excluded.  Needs 3 usable cells.
    Returns (slope, slope_se, intercept).
    """
    t = np.asarray(t_values, dtype=float)
    s = np.asarray(survival, dtype=float)
    se = np.asarray(stderr, dtype=float)
    if not (t.shape == s.shape == se.shape):
        raise ValueError("exp_tail_fit arrays must share a shape")
    with np.errstate(divide="ignore", invalid="ignore"):
        n_eff = s * (1.0 - s) / (se * se)
        hits = n_eff * s
    keep = (s > 0.0) & (se > 0.0) & np.isfinite(hits) & (hits >= 20.0)
    if keep.sum() < 3:
        raise InsufficientDataError(
            f"exp_tail_fit: only {int(keep.sum())} usable cells, need 3")
    t = t[keep]
    y = np.log(s[keep])
    w = (s[keep] / se[keep]) ** 2
    sw = w.sum()
    swt = (w * t).sum()
    swtt = (w * t * t).sum()
    swy = (w * y).sum()
    swty = (w * t * y).sum()
    det = sw * swtt - swt * swt
    slope = (sw * swty - swt * swy) / det
    intercept = (swtt * swy - swt * swty) / det
    slope_se = math.sqrt(sw / det)
    return float(slope), float(slope_se), float(intercept)


def lil_statistic(branch_times, branch_values) -> LilReport:
    """Y_n / sqrt(2 T_n ln ln T_n) and its running maximum.

    Entries with T_n <= e are skipped (the normalizer is undefined there)
    and counted in n_skipped.
    """
    t = np.asarray(branch_times, dtype=float)
    y = np.asarray(branch_values, dtype=float)
    if t.shape != y.shape:
        raise ValueError("branch arrays must share a shape")
    ok = t > math.e
    n_skipped = int((~ok).sum())
    t = t[ok]
    y = y[ok]
    if t.size == 0:
        raise InsufficientDataError("no branch times above e")
    stats_ = y / np.sqrt(2.0 * t * np.log(np.log(t)))
    return LilReport(times=t, stats=stats_,
                     running_max=np.maximum.accumulate(stats_),
                     n_skipped=n_skipped)


def drift_test(samples, null_value: float):
    """Gaussian z-test of the sample mean against a null value."""
    x = np.asarray(samples, dtype=float)
    if x.size < 30:
        raise InsufficientDataError("drift_test needs at least 30 samples")
    if not np.isfinite(x).all():
        raise ValueError("drift_test got non-finite samples")
    sem = x.std(ddof=1) / math.sqrt(x.size)
    z = (float(x.mean()) - null_value) / sem
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return float(z), float(p)


def runs_test(x):
    """Wald-Wolfowitz runs test (above/below median) for serial dependence."""
    x = np.asarray(x, dtype=float)
    if x.size < 30:
        raise InsufficientDataError("runs_test needs at least 30 samples")
    med = np.median(x)
    s = x > med
    s = s[x != med]  # drop ties with the median
    n1 = int(s.sum())
    n2 = int(s.size - n1)
    if n1 == 0 or n2 == 0:
        raise InsufficientDataError("runs_test: one-sided sample")
    runs = 1 + int((s[1:] != s[:-1]).sum())
    n = n1 + n2
    mu = 2.0 * n1 * n2 / n + 1.0
    var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0))
    z = (runs - mu) / math.sqrt(var)
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return float(z), float(p)
