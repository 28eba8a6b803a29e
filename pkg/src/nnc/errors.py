"""Structured exceptions shared across the library.

Every error carries a short machine-readable ``details`` dict next to the
human message so callers (and the CLI) can surface the offending rows,
indices, or parameter values without parsing strings.
"""
from __future__ import annotations


class NNCError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details


class InvalidParameterError(NNCError):
    """A parameter is outside its documented domain (alpha < 0, xi >= epsilon, ...)."""


class DimensionMismatchError(NNCError):
    """Query or point dimensionality does not match the set."""


class EmptyCandidatesError(NNCError):
    """A restriction or candidate collection is empty."""


class SingleClassError(NNCError):
    """An operation that needs enemies was given points of a single class."""


class DuplicateConflictError(NNCError):
    """Identical coordinates carry different labels (margin would be zero)."""


class CoincidentPointsError(NNCError):
    """All points coincide; the set has no usable extent."""


class MemberPointQueryError(NNCError):
    """A query coincides with a candidate member where the quantity is undefined."""


class QuadraticGateError(NNCError):
    """A pairwise O(n^2) computation on a large set was not explicitly forced."""


class SizeCapError(NNCError):
    """Input exceeds a hard size cap of an intentionally expensive routine."""


class EmptyActiveSetError(NNCError):
    """A dynamic index was queried before any point was inserted."""


class PreconditionError(NNCError):
    """A checker's documented precondition does not hold for the given input."""


class SubsetFormatError(NNCError):
    """A subset file is unreadable, malformed, or internally inconsistent."""


class FingerprintMismatchError(NNCError):
    """A subset file does not belong to the dataset it is being applied to."""


class CsvFormatError(NNCError):
    """A dataset CSV is unreadable, empty, ragged, or holds non-numeric
    feature cells."""
