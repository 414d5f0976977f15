"""Exception hierarchy shared by all modules.

The CLI maps these onto its exit codes: validation errors exit with 2,
precision errors with 3 and breakdown errors with 4.
"""


class ConformalRMTError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ConformalRMTError, ValueError):
    """An input violates an operation's precondition."""


class DomainError(ValidationError):
    pass


class UncertifiedCurveError(ValidationError):
    """The curve has simplicity margin xi <= 0, so h is not a certified Riemann map."""


class OutOfRegimeError(ValidationError):
    pass


class BoundaryAmbiguityError(ValidationError):
    """A query point lies (numerically) on the boundary polyline."""


class OutsideAnalyticityError(ValidationError):
    """No preimage with |w| >= 1 - collar: the point is too deep inside the curve."""


class BranchAmbiguityError(ValidationError):
    pass


class DecompositionUndefinedError(ValidationError):
    pass


class NearSingularError(ValidationError):
    """Block system with |k| too close to 1."""


class PrecisionError(ConformalRMTError, ArithmeticError):
    pass


class BreakdownError(ConformalRMTError):
    """A deformation step produced no certified curve.

    ``s`` holds the deformation parameter at which the failure happened
    (``None`` outside of a trajectory).
    """

    def __init__(self, message, s=None, xi=None):
        super().__init__(message)
        self.s = s
        self.xi = xi


class NoSolutionError(BreakdownError):
    """Newton iteration for the inverse moment map did not converge."""


class ConvergenceError(ConformalRMTError):
    """An asserted convergence property failed to hold."""
