"""Simulation laboratory for a two-particle branching diffusion, its spine,
and the 3-d Bessel comparison process."""

__version__ = "0.1.0"

from .bessel import (
    bessel_tail_check,
    intrinsic_log_ou,
    intrinsic_log_path,
    intrinsic_log_realtime,
    path_value_at,
    sample_bessel_endpoint,
    sample_bessel_min_exact,
    simulate_bessel3,
    simulate_bessel_min,
    truncated_min_vs_exact,
)
from .errors import (
    BudgetExceededError,
    DivergentIntegralError,
    InsufficientDataError,
    OutOfHorizonError,
    SingularClockError,
)
from .fv import (
    ClockTable,
    FvTrajectory,
    PathGrid,
    additive_clock,
    clock_inverse,
    extract_spine,
    first_branch_sample,
    hn_sn_sequence,
    simulate_fv,
)
from .rng import ExitSample, RandomSource
from .skeleton import (
    SkeletonChain,
    min_log_until_barrier,
    simulate_skeleton,
    tail_curve,
)
from .stats import (
    EstimateReport,
    LilReport,
    drift_test,
    exp_tail_fit,
    ks_one_sample,
    ks_two_sample,
    lil_statistic,
    mean_ci,
    runs_test,
)
from .steplaw import (
    QuadratureSpec,
    RootReport,
    bessel_min_cdf,
    solve_tail_exponent,
    xi_cdf,
    xi_density,
    xi_log_mean,
    xi_neg_moment,
    xi_quantile,
)
from .strip import (
    SpineCheckpoint,
    StripTrace,
    classify,
    discriminator_statistic,
    renewal_drift_estimate,
    simulate_strip,
    spine_checkpoints,
)

__all__ = [
    "BudgetExceededError",
    "DivergentIntegralError",
    "InsufficientDataError",
    "OutOfHorizonError",
    "SingularClockError",
    "ExitSample",
    "RandomSource",
    "QuadratureSpec",
    "RootReport",
    "bessel_min_cdf",
    "solve_tail_exponent",
    "xi_cdf",
    "xi_density",
    "xi_log_mean",
    "xi_neg_moment",
    "xi_quantile",
    "SkeletonChain",
    "simulate_skeleton",
    "min_log_until_barrier",
    "tail_curve",
    "StripTrace",
    "SpineCheckpoint",
    "simulate_strip",
    "renewal_drift_estimate",
    "spine_checkpoints",
    "discriminator_statistic",
    "classify",
    "PathGrid",
    "ClockTable",
    "FvTrajectory",
    "simulate_fv",
    "first_branch_sample",
    "extract_spine",
    "additive_clock",
    "clock_inverse",
    "hn_sn_sequence",
    "sample_bessel_endpoint",
    "sample_bessel_min_exact",
    "simulate_bessel_min",
    "simulate_bessel3",
    "intrinsic_log_path",
    "intrinsic_log_realtime",
    "intrinsic_log_ou",
    "bessel_tail_check",
    "truncated_min_vs_exact",
    "path_value_at",
    "EstimateReport",
    "LilReport",
    "mean_ci",
    "ks_one_sample",
    "ks_two_sample",
    "exp_tail_fit",
    "lil_statistic",
    "drift_test",
    "runs_test",
    "__version__",
]
