"""Exception hierarchy shared by all sparsecoint modules."""

from __future__ import annotations


class SparseCointError(Exception):
    """Base class for all library errors.

    The ``stage`` attribute is filled in by the detection pipeline so that
    callers can tell which step of a multi-stage computation failed.
    """

    stage: str | None = None


class NotPositiveDefiniteError(SparseCointError):
    """A matrix required to be positive definite has a pivot <= 0."""


class RankDeficientError(SparseCointError):
    """A regression design is collinear beyond the rank tolerance."""


class DidNotConvergeError(SparseCointError):
    """Coordinate descent hit its sweep limit.

    Carries the partial fit so the caller can inspect it or retry with
    tighter settings.
    """

    def __init__(self, message: str, fit=None):
        super().__init__(message)
        self.fit = fit


class DegenerateRssError(SparseCointError):
    """A residual sum of squares is <= 0 where a positive value is required."""


class InitialOlsInfeasibleError(SparseCointError):
    """The initial full OLS is infeasible (n <= p + 1)."""


class EmptyInputError(SparseCointError):
    """An aggregation was asked to operate on an empty collection."""


class ConfigFieldError(SparseCointError):
    """A configuration value is invalid; ``field`` names the offender."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class CsvFormatError(SparseCointError):
    """A data file failed to parse; ``row``/``col`` locate the first error (1-based)."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        super().__init__(message)
        self.row = row
        self.col = col
