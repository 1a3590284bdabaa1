"""Exception types shared across the package."""


class MccvError(Exception):
    """Base class for all errors raised by this package."""


class NonFiniteInput(MccvError):
    """Input array contains NaN or infinite entries."""


class ConstantColumn(MccvError):
    """A design-matrix column has zero variance and cannot be standardized."""

    def __init__(self, column: int):
        super().__init__(f"column {column} has zero variance")
        self.column = column


class DegenerateGrid(MccvError):
    """The response is orthogonal to every column, so no penalty grid exists."""


class SingularGram(MccvError):
    """The Gram matrix on the requested support is numerically singular."""


class SupportTooLarge(MccvError):
    """The requested support has at least as many columns as there are rows."""


class DimensionMismatch(MccvError):
    """Matrix/vector shapes are inconsistent."""


class LengthMismatch(MccvError):
    """Two vectors that must be equal length are not."""


class BadK(MccvError):
    """Invalid number of folds."""


class BadSizes(MccvError):
    """Invalid Monte Carlo split sizes."""


class BadConfig(MccvError):
    """Invalid experiment configuration."""


class NotPositiveDefinite(MccvError):
    """A covariance specification did not yield a positive definite matrix."""


class AllLambdasDisqualified(MccvError):
    """Every grid column was disqualified, so no penalty level can be selected."""
