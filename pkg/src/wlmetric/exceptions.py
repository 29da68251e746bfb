"""Exception hierarchy.

Everything raised on bad input derives from :class:`ValidationError`, so the
CLI can map it to exit code 2. File-system and parse problems derive from
:class:`DataIOError` (exit code 3).
"""


class WLMetricError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(WLMetricError, ValueError):
    """Input fails a documented precondition or invariant."""


class ShapeMismatch(ValidationError):
    pass


class NonStochasticRow(ValidationError):
    pass


class NotStationary(ValidationError):
    pass


class ZeroMass(ValidationError):
    pass


class NotAMetric(ValidationError):
    pass


class NoConvergence(WLMetricError, RuntimeError):
    pass


class EmptyDistribution(ValidationError):
    pass


class InfeasibleMarginals(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class LabelDimMismatch(DimensionMismatch):
    pass


class TooLarge(ValidationError):
    pass


class InvalidEdge(ValidationError):
    pass


class IsolatedVertex(ValidationError):
    pass


class MarginalMismatch(ValidationError):
    pass


class DegenerateFold(ValidationError):
    pass


class PairFailure(WLMetricError):
    """A single cell of a pairwise distance matrix could not be computed."""

    def __init__(self, i, j, cause):
        super().__init__(f"pair ({i}, {j}) failed: {cause}")
        self.pair = (i, j)
        self.cause = cause


class DataIOError(WLMetricError, OSError):
    pass


class ParseError(DataIOError):
    pass


class MissingFile(DataIOError):
    pass


class IndexOutOfRange(ValidationError):
    pass
