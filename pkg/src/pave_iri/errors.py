"""Exception hierarchy shared by every module."""

from __future__ import annotations


class PaveIriError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PaveIriError, ValueError):
    """An argument lies outside the domain of an operation."""


class SchemaError(PaveIriError):
    """A column, feature registry or model fingerprint does not match."""


class ValidationError(PaveIriError, ValueError):
    """A record violates a domain invariant."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RowError(ValidationError):
    """A cell could not be parsed."""


class EmptyCorpusError(PaveIriError):
    """A corpus file contains no data rows."""


class StateError(PaveIriError):
    """An operation was called on an object in the wrong state."""


class SplitError(PaveIriError):
    """A dataset is too small to split."""


class DegenerateTrainingError(PaveIriError):
    """Training data cannot support the requested model (e.g. one class)."""
