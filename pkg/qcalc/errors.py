"""
Exceptions raised by qcalc.
"""


class QCalcError(Exception):
    """Base class for every qcalc error."""


class DomainError(QCalcError, ValueError):
    """An argument is outside the domain of the operation."""


class ParityError(QCalcError, ValueError):
    """An operation needs a declared parity that is missing or unsuitable."""


class ExpressionError(QCalcError, ValueError):
    """A coefficient expression could not be parsed."""


class MissingValue(QCalcError, LookupError):
    """A lattice value needed by an operation is outside the window or marked missing."""


class TruncationNotConverged(QCalcError):
    """A truncated series or product hit max_terms before its terms became negligible."""


class NotQRegular(QCalcError):
    """Ring values do not stabilize towards zero."""


class TailNotNegligible(QCalcError):
    """The geometric tail bound of a Jackson sum exceeds series_tol."""

    def __init__(self, message: str, tail: str = "small-x", bound: float = float("nan")):
        super().__init__(message)
        self.tail = tail
        self.bound = bound


class EvaluationError(QCalcError):
    """A user callable failed or returned a non-finite value."""


class NotContracting(QCalcError):
    """The Picard iteration does not contract on the chosen window."""


class MaxIterations(QCalcError):
    """The Picard iteration did not reach the tolerance within max_iter steps."""


class SingularFactor(QCalcError):
    """A factor 1 + x(1-q)E(x) of the Liouville product vanishes."""
