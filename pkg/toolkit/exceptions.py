"""Errors raised by the toolkit.

Input and parameter problems are ``ValueError`` subclasses so callers that only
care about "bad input" can catch ``ValueError``. Iteration failures are
``RuntimeError`` subclasses.
"""


class NormError(ValueError):
    """Base class for invalid inputs to an n-norm computation."""


class InvalidParameterError(NormError):
    """A numeric parameter (n, p, d, tolerances, eps, counts) is out of range."""


class DimensionMismatchError(NormError):
    """Vectors combined in one operation do not share a dimension, or n > d."""


class NonFiniteInputError(NormError):
    """An input vector holds NaN or an infinity."""


class DegenerateAnchorsError(NormError):
    """The anchor set is not linearly independent."""


class InvalidSubsetError(NormError):
    """An index subset is empty, unsorted, repeated or out of range."""


class NumericalBreakdownError(NormError):
    """A quantity that is nonnegative in exact arithmetic came out clearly negative."""


class NoInformativePairsError(NormError):
    """Every sampled pair had a vanishing denominator."""


class ConvergenceError(RuntimeError):
    """Error raised when an iteration cannot be continued."""


class DivergenceError(ConvergenceError):
    """Successive differences kept growing for the whole divergence window."""


class NonFiniteIterateError(ConvergenceError):
    """An iterate left the finite floating-point range."""
