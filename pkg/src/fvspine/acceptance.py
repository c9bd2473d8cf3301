"""Acceptance criteria: eleven numbered end-to-end checks.

Each criterion function runs a fixed-seed experiment at full scale (or a
reduced quick scale with widened, pre-registered tolerances) and returns a
CriterionResult with one Check per stated requirement.  Criteria 4, 5 and
10 read the same memoized strip ensemble, so whichever runs first pays the
simulation cost for all three.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import bessel, fv, skeleton, stats, steplaw, strip
from .constants import EXIT_MEAN, JUMP_RATE, KAPPA, LOG_SQRT2
from .rng import RandomSource
from .skeleton import Method

SEED_STRIP = 1104
SEED_STEP = 1202
SEED_CHAIN = 1303
SEED_TAIL = 1606
SEED_MIN = 1707
SEED_DRIFT = 1808
SEED_PATH = 1909
SEED_ORACLE = 1910
SEED_CLASS = 2010
SEED_LIL = 2111


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class CriterionResult:
    num: int
    name: str
    passed: bool
    runtime_s: float
    checks: tuple[Check, ...]


def _near(name: str, measured: float, target: float, tol: float) -> Check:
    ok = abs(measured - target) <= tol
    return Check(name, ok,
                 f"measured {measured:.6g}, target {target:.6g} +- {tol:.2g}")


def _above(name: str, measured: float, floor: float) -> Check:
    return Check(name, measured > floor,
                 f"measured {measured:.6g}, required > {floor:.3g}")


def _result(num: int, name: str, t0: float, checks) -> CriterionResult:
    checks = tuple(checks)
    return CriterionResult(num, name, all(c.passed for c in checks),
                           time.perf_counter() - t0, checks)


# --------------------------------------------------------------------------
# shared strip ensemble (criteria 4, 5, 10)

_ENSEMBLE: dict = {}


def _strip_ensemble(quick: bool):
    key = bool(quick)
    if key not in _ENSEMBLE:
        n, u = (20, 2_000.0) if quick else (100, 10_000.0)
        _ENSEMBLE[key] = [
            strip.simulate_strip(RandomSource(SEED_STRIP, i), u)
            for i in range(n)
        ]
    return _ENSEMBLE[key]


# --------------------------------------------------------------------------
# criteria

def criterion_1(quick: bool = False) -> CriterionResult:
    """Tail-exponent root and the unit negative moment."""
    t0 = time.perf_counter()
    rep = steplaw.solve_tail_exponent()
    m1 = steplaw.xi_neg_moment(1.0)
    return _result(1, "exponent-root", t0, [
        _near("root", rep.root, 1.0, 1e-4),
        _near("neg_moment_at_1", m1, 1.0, 1e-6),
    ])


def criterion_2(quick: bool = False) -> CriterionResult:
    """Step-factor sampler against the analytic law."""
    t0 = time.perf_counter()
    n = 20_000 if quick else 100_000
    med_tol = 0.02 if quick else 0.01
    rs = RandomSource(SEED_STEP, 0)
    x = np.array([rs.sample_step_factor() for _ in range(n)])
    _, ks_p = stats.ks_one_sample(x, np.vectorize(steplaw.xi_cdf))
    return _result(2, "step-law", t0, [
        _above("ks_p", ks_p, 0.01),
        _near("median", float(np.median(x)), math.sqrt(2.0), med_tol),
    ])


def criterion_3(quick: bool = False) -> CriterionResult:
    """Direct-step and renewal-step chains produce the same increments."""
    t0 = time.perf_counter()
    n = 20_000 if quick else 100_000
    a = skeleton.simulate_skeleton(RandomSource(SEED_CHAIN, 0), n,
                                   Method.XI_DIRECT).log_increments
    b = skeleton.simulate_skeleton(RandomSource(SEED_CHAIN, 1), n,
                                   Method.RENEWAL_STEP).log_increments
    _, ks_p = stats.ks_two_sample(a, b)
    checks = [_above("two_sample_ks_p", ks_p, 0.01)]
    for name, arr in (("mean_direct", a), ("mean_renewal", b)):
        se = float(arr.std(ddof=1)) / math.sqrt(arr.size)
        checks.append(_near(name, float(arr.mean()), LOG_SQRT2, 3 * se))
    return _result(3, "representation-equivalence", t0, checks)


def criterion_4(quick: bool = False) -> CriterionResult:
    """Renewal constants: exit-time mean, jump rate per unit clock."""
    t0 = time.perf_counter()
    exit_tol = 0.02 if quick else 0.005
    rate_tol = 0.03 if quick else 0.01
    traces = _strip_ensemble(quick)
    gaps = np.concatenate([np.diff(np.concatenate([[0.0], tr.r]))
                           for tr in traces])
    rate = sum(tr.n_jumps for tr in traces) / sum(float(tr.r[-1])
                                                  for tr in traces)
    return _result(4, "renewal-constants", t0, [
        _near("exit_mean_rel", float(gaps.mean()) / EXIT_MEAN, 1.0,
              exit_tol),
        _near("jump_rate_rel", rate / JUMP_RATE, 1.0, rate_tol),
    ])


def criterion_5(quick: bool = False) -> CriterionResult:
    """Endpoint drift of the log spine on the clock scale."""
    t0 = time.perf_counter()
    n = 10 if quick else 50
    tol = 0.05 if quick else 0.01
    traces = _strip_ensemble(quick)[:n]
    ratios = [float(tr.z1[-1] / tr.r[-1]) for tr in traces]
    return _result(5, "kappa-drift", t0, [
        _near("mean_ratio_rel", float(np.mean(ratios)) / KAPPA, 1.0, tol),
    ])


def criterion_6(quick: bool = False) -> CriterionResult:
    """Unit tail exponent and tail-constant stability of the skeleton."""
    t0 = time.perf_counter()
    replicas = 100_000 if quick else 1_000_000
    slope_tol = 0.15 if quick else 0.1
    t_grid = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
    reps = skeleton.tail_curve(RandomSource(SEED_TAIL, 0), replicas, t_grid)
    surv = [r.estimate for r in reps]
    errs = [r.stderr for r in reps]
    slope, _, _ = stats.exp_tail_fit(t_grid, surv, errs)
    by_t = {r.extras["t"]: r.extras for r in reps}
    drift = abs(by_t[4.0]["c_hat"] - by_t[3.0]["c_hat"])
    band = 3 * math.hypot(by_t[4.0]["c_stderr"], by_t[3.0]["c_stderr"])
    return _result(6, "skeleton-tail-exponent", t0, [
        _near("slope", slope, -1.0, slope_tol),
        Check("c_hat_stability", drift <= band,
              f"|c(4) - c(3)| = {drift:.5f}, allowed {band:.5f}"
              f" (3 x combined SE)"),
    ])


def criterion_7(quick: bool = False) -> CriterionResult:
    """Exact minimum law: uniform levels, exponential log, unit log tail."""
    t0 = time.perf_counter()
    n = 100_000 if quick else 1_000_000
    ks_n = 20_000 if quick else 100_000
    rs = RandomSource(SEED_MIN, 0)
    mins = bessel.sample_bessel_min_exact(rs, n, 1.0)
    checks = []
    for a in (0.1, 0.5, 0.9):
        p = float(np.count_nonzero(mins < a)) / n
        se = math.sqrt(a * (1.0 - a) / n)
        checks.append(_near(f"p_min_below_{a}", p, a, 3 * se))
    _, ks_p = stats.ks_one_sample(-np.log(mins[:ks_n]),
                                  lambda v: -np.expm1(-v))
    checks.append(_above("neg_log_ks_p", ks_p, 0.01))
    for rep in bessel.bessel_tail_check(RandomSource(SEED_MIN, 1),
                                        [1.0, 2.0, 3.0], n):
        checks.append(_near(f"log_tail_u{rep.extras['u']:g}",
                            rep.estimate, -1.0, 0.05))
    return _result(7, "bessel-minimum-law", t0, checks)


def criterion_8(quick: bool = False) -> CriterionResult:
    """Intrinsic-clock drift 1/2 with unit diffusive fluctuations."""
    t0 = time.perf_counter()
    replicas = 20 if quick else 100
    u_max = 50.0 if quick else 100.0
    ratio_tol = 0.1 if quick else 0.05
    var_tol = 0.25 if quick else 0.1
    # the lockstep route stops at the clock horizon itself; a fixed time
    # horizon would leave each lane a gaussian-tail chance of falling short
    # of u_max, since the span of clock reached by time t is log t plus a
    # fluctuation of the order sqrt(log t)
    paths = bessel.intrinsic_log_realtime(RandomSource(SEED_DRIFT, 0),
                                          replicas, 1.0, u_max)
    ratios, incs = [], []
    marks = np.arange(0.0, u_max + 0.5)
    for g in paths:
        ratios.append(bessel.path_value_at(g, u_max) / u_max)
        g_marks = np.array([bessel.path_value_at(g, u) for u in marks])
        incs.append(np.diff(g_marks - marks / 2.0))
    incs = np.concatenate(incs)
    var = float(np.var(incs, ddof=1))
    return _result(8, "bessel-intrinsic-drift", t0, [
        _near("mean_ratio", float(np.mean(ratios)), 0.5, ratio_tol),
        _near("increment_var", var, 1.0, var_tol),
    ])


def criterion_9(quick: bool = False) -> CriterionResult:
    """First-branch law against the chain oracle; clock-level ordering."""
    t0 = time.perf_counter()
    n = 2_000 if quick else 10_000
    n_traj, branches = (20, 10) if quick else (100, 20)
    y1, _ = fv.first_branch_sample(RandomSource(SEED_PATH, 0), n, dt=1e-5)
    oracle = np.exp(skeleton.simulate_skeleton(
        RandomSource(SEED_ORACLE, 0), n, Method.XI_DIRECT).log_increments)
    _, ks_p = stats.ks_two_sample(y1, oracle)
    violations = 0
    reported = 0
    truncated = 0
    for i in range(n_traj):
        tr = fv.simulate_fv(RandomSource(SEED_PATH, i + 1),
                            max_branches=branches)
        _, h, s, cut = fv.hn_sn_sequence(tr)
        violations += int(np.count_nonzero(h > s))
        reported += h.size
        truncated += cut
    return _result(9, "path-level-consistency", t0, [
        _above("y1_two_sample_ks_p", ks_p, 0.01),
        Check("h_below_s", violations == 0,
              f"{violations} violations over {reported} reported levels"
              f" ({truncated} beyond the clock horizon)"),
    ])


def criterion_10(quick: bool = False) -> CriterionResult:
    """Windowed max statistic separates the two path classes."""
    t0 = time.perf_counter()
    if quick:
        window, sep_floor, acc_floor, bessel_tol = (500.0, 1_000.0), 3.0, \
            0.85, 0.05
    else:
        window, sep_floor, acc_floor, bessel_tol = (5_000.0, 10_000.0), \
            4.0, 0.90, 0.02
    traces = _strip_ensemble(quick)
    spine_stats = []
    for tr in traces:
        cps = strip.spine_checkpoints(tr)
        u = np.array([cp.h for cp in cps])
        g = np.array([cp.log_value for cp in cps])
        spine_stats.append(strip.discriminator_statistic(u, g, window))
    paths = bessel.intrinsic_log_ou(RandomSource(SEED_CLASS, 0),
                                    len(traces), 1.0, window[1])
    bessel_stats = [strip.discriminator_statistic(p.t, p.x, window)
                    for p in paths]

    m_s = float(np.mean(spine_stats))
    m_b = float(np.mean(bessel_stats))
    se_s = float(np.std(spine_stats, ddof=1)) / math.sqrt(len(spine_stats))
    se_b = float(np.std(bessel_stats, ddof=1)) / math.sqrt(len(bessel_stats))
    separation = abs(m_s - m_b) / math.hypot(se_s, se_b)

    # cross-validated threshold; the side the spine lies on is learned from
    # the training folds, not presumed
    folds = 5
    correct = 0
    total = 0
    for label, data, other in (("spine", spine_stats, bessel_stats),
                               ("bessel", bessel_stats, spine_stats)):
        for i, s in enumerate(data):
            f = i % folds
            tr_own = [v for j, v in enumerate(data) if j % folds != f]
            tr_oth = [v for j, v in enumerate(other) if j % folds != f]
            if label == "spine":
                tr_sp, tr_be = tr_own, tr_oth
            else:
                tr_sp, tr_be = tr_oth, tr_own
            orient = 1.0 if np.mean(tr_sp) >= np.mean(tr_be) else -1.0
            thr = (float(np.mean(tr_sp)) + float(np.mean(tr_be))) / 2.0
            pred = strip.classify(orient * s, orient * thr)
            correct += pred == label
            total += 1
    accuracy = correct / total
    ci = (m_s - 1.96 * se_s, m_s + 1.96 * se_s)
    return _result(10, "class-separability", t0, [
        Check("separation", separation >= sep_floor,
              f"{separation:.1f} pooled SE, required >= {sep_floor:g}"),
        Check("held_out_accuracy", accuracy >= acc_floor,
              f"{accuracy:.3f}, required >= {acc_floor:g}"),
        _near("bessel_class_mean", m_b, 0.5, bessel_tol),
        Check("spine_location_reported", True,
              f"spine class mean {m_s:.4f}, 95% CI"
              f" [{ci[0]:.4f}, {ci[1]:.4f}]"),
    ])


def criterion_11(quick: bool = False) -> CriterionResult:
    """Iterated-logarithm sanity band for the branch values."""
    t0 = time.perf_counter()
    replicas = 5 if quick else 20
    t_max = 1e5 if quick else 1e6
    tops = []
    for i in range(replicas):
        tr = fv.simulate_fv(RandomSource(SEED_LIL, i), max_branches=60,
                            t_max=t_max, record_stride=0)
        rep = stats.lil_statistic(tr.branch_times, tr.branch_values)
        tops.append(float(rep.running_max[-1]))
    lo, hi = min(tops), max(tops)
    return _result(11, "lil-sanity-band", t0, [
        Check("band", 0.3 <= lo and hi <= 1.5,
              f"running-max stats span [{lo:.3f}, {hi:.3f}],"
              f" band [0.3, 1.5] over {replicas} replicas"),
    ])


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8,
            criterion_9, criterion_10, criterion_11)


def run_all(quick: bool = False) -> list[CriterionResult]:
    return [c(quick) for c in CRITERIA]
