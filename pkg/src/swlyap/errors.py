"""Exception hierarchy shared across the package.

Each error class maps to one CLI exit code; see cli.EXIT_CODES.
"""


class SwlyapError(Exception):
    """Base class for all package-specific errors."""


class NumericDomainError(SwlyapError):
    """Non-finite or otherwise invalid numeric input."""


class DimensionError(SwlyapError):
    """Incompatible matrix/vector dimensions."""


class OutOfHorizonError(SwlyapError):
    """Time request beyond a non-periodic switching law's horizon."""


class BudgetExceededError(SwlyapError):
    """A configured work budget (generators, pivots, coefficients) was hit.

    Carries the partial result when one exists; it is flagged unusable and
    must not be silently consumed.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DegenerateBallError(SwlyapError):
    """Polyhedral function vanishes on a line; its unit ball is unbounded."""


class UndefinedSubgradientError(SwlyapError):
    """Subgradient requested at the origin where it is not defined."""


class ContractViolationError(SwlyapError):
    """Caller passed an argument outside the operation's contract."""


class BracketError(SwlyapError):
    """Bisection bracket does not straddle the target value."""


class WrongBranchError(SwlyapError):
    """Critical calibration landed on the +1 eigenvalue branch instead of -1."""


class VerificationViolatedError(SwlyapError):
    """Raised by the CLI when a verification run returns a violation witness."""
