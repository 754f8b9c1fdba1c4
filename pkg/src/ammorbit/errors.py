"""Exception types shared across the library.

Every error raised on purpose derives from AmmError so callers can catch
one base class at the CLI boundary and map it to an exit code.
"""

from __future__ import annotations


class AmmError(Exception):
    """Base class for all library errors."""


class MalformedInputError(AmmError):
    """An input contained a NaN, an infinity, or had the wrong shape."""


class DomainError(AmmError):
    """A value was outside the admissible domain (e.g. a reserve <= 0)."""


class UsageError(AmmError):
    """An operation was called with inconsistent arguments."""


class ConfigError(AmmError):
    """A rule or harness configuration parameter was out of range."""


class NumericError(AmmError):
    """A computation produced a non-finite or non-representable value."""


class ChainError(AmmError):
    """A multi-swap chain left the rule's domain.

    Carries the index of the failing step and the partial trajectory
    accumulated before the failure.
    """

    def __init__(self, message: str, step: int, partial):
        super().__init__(message)
        self.step = step
        self.partial = partial


class SamplingError(AmmError):
    """Orbit sampling hit the domain boundary; carries the partial sample."""

    def __init__(self, message: str, partial):
        super().__init__(message)
        self.partial = partial


class DegenerateSampleError(AmmError):
    """Too few distinct points, or a rank-deficient cloud, for a fit."""


class VerticalFitError(AmmError):
    """The fitted log-space line is vertical; no slope exists."""


class ClassificationError(AmmError):
    """A fit succeeded numerically but does not describe a valid invariant."""
