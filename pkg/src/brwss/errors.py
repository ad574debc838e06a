"""Exception types shared across the package."""


class BrwssError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(BrwssError, ValueError):
    """Operands have incompatible dimensions (e.g. genotypes of unequal length)."""


class DomainError(BrwssError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class RegimeError(BrwssError, ValueError):
    """The growth parameter rho is outside the regime required by a predictor."""


class NoRootError(BrwssError, RuntimeError):
    """The root scan found no sign change.

    Carries the scanned window and the residual values at its endpoints so the
    failure is diagnosable without rerunning.
    """

    def __init__(self, message, window, values):
        super().__init__(f"{message} (scanned t in [{window[0]:.6g}, {window[1]:.6g}], "
                         f"residuals {values[0]:.6g} .. {values[1]:.6g})")
        self.window = window
        self.values = values


class QuadratureError(BrwssError, RuntimeError):
    """Adaptive quadrature failed to converge within its evaluation budget."""

    def __init__(self, message, estimate=None, evaluations=None):
        if estimate is not None:
            message = f"{message} (estimate {estimate:.6g} after {evaluations} evaluations)"
        super().__init__(message)
        self.estimate = estimate
        self.evaluations = evaluations
