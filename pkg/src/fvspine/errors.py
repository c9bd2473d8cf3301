"""Exception types shared across the package."""


class DivergentIntegralError(ValueError):
    """Requested moment/integral does not converge for these parameters."""


class SingularClockError(ValueError):
    """Additive clock hit a nonpositive path value."""


class OutOfHorizonError(RuntimeError):
    """Requested clock level lies beyond the accumulated horizon."""


class BudgetExceededError(RuntimeError):
    """A step budget was exhausted before the stopping rule triggered."""


class InsufficientDataError(ValueError):
    """Estimator needs more samples/horizon than provided."""
