"""Exception hierarchy.

Every error raised by the package derives from :class:`HsvarError`.  Input
problems derive from :class:`ValidationError` (CLI exit code 2); numerical
breakdowns derive from :class:`NumericalError` (CLI exit code 3).
"""

from __future__ import annotations


class HsvarError(Exception):
    """Base class for all package errors."""


class ValidationError(HsvarError, ValueError):
    """Invalid input or configuration."""


class NumericalError(HsvarError, ArithmeticError):
    """A numerical procedure could not produce a valid result."""


# validation
class NotSymmetric(ValidationError):
    pass


class DofTooSmall(ValidationError):
    pass


class InvalidRegime(ValidationError):
    pass


class RegimeTooShort(ValidationError):
    pass


class InvalidRange(ValidationError):
    pass


class InvalidPartition(ValidationError):
    pass


class DimensionTooLarge(ValidationError):
    pass


class HorizonExceeded(ValidationError):
    pass


class IndexOutOfBounds(ValidationError):
    pass


class CaseMismatch(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.row = row
        self.column = column


class MissingValue(ParseError):
    pass


class BreakOutOfRange(ValidationError):
    pass


class SpecSyntaxError(ValidationError):
    """Malformed restriction-spec line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateRestriction(SpecSyntaxError):
    pass


class ConfigError(ValidationError):
    pass


# numerical
class NotPositiveDefinite(NumericalError):
    pass


class SingularRegressors(NumericalError):
    pass


class SingularWeighting(NumericalError):
    pass


class SingularPosteriorCovariance(NumericalError):
    pass


class UnstableVar(NumericalError):
    pass


class NoConvergence(NumericalError):
    def __init__(self, message: str, last=None, trace=None):
        super().__init__(message)
        self.last = last
        self.trace = list(trace) if trace is not None else []


class RedundantRestrictions(NumericalError):
    pass


class DegenerateMoments(NumericalError):
    pass


class ProjectionDegenerate(NumericalError):
    pass


class NoFeasibleStart(NumericalError):
    pass


class AllDrawsEmpty(NumericalError):
    pass


class AcceptanceTooLow(NumericalError):
    pass
