"""Exception types raised across the package.

Every error derives from :class:`ScplurError` (itself a ``ValueError``) so
callers can catch the whole family at once.  The CLI maps them onto exit
codes via :attr:`ScplurError.exit_code`.
"""

from __future__ import annotations


class ScplurError(ValueError):
    """Base class for all package errors."""

    exit_code = 3


class InvalidConfigError(ScplurError):
    exit_code = 1


class ShapeError(ScplurError):
    exit_code = 2


class InsufficientLengthError(ScplurError):
    exit_code = 2


class DegenerateSegmentationError(ScplurError):
    """Welch segmentation yields fewer than two segments."""

    exit_code = 1


class ZeroVarianceError(ScplurError):
    """Target variance is zero, so any variance-normalized score is undefined."""


class ZeroEnergyError(ScplurError):
    pass


class InvalidPartitionError(ScplurError):
    exit_code = 1


class InvalidSpecError(ScplurError):
    exit_code = 1


class SingularSystemError(ScplurError):
    pass


class UndefinedCorrelationError(ScplurError):
    pass


class EmptyInputError(ScplurError):
    exit_code = 2


class OrderingError(ScplurError):
    exit_code = 2


class AlignmentError(ScplurError):
    exit_code = 2


class DataError(ScplurError):
    """Malformed input file (parse failure, non-numeric or missing cell)."""

    exit_code = 2


class ReportFormatError(ScplurError):
    exit_code = 1
