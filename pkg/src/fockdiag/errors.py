"""Exception hierarchy shared across the package.

Every error raised deliberately by this package derives from
:class:`FockDiagError`, so callers can catch one type at the boundary.
Subclasses also inherit from the closest builtin category (ValueError,
LookupError, ...) to keep duck-typed call sites working.
"""

from __future__ import annotations

__all__ = [
    "FockDiagError",
    "DomainError",
    "MissingAsppError",
    "EnsembleError",
    "ProbabilityError",
    "VisibilityUndefinedError",
    "RankDeficientError",
    "CountDataError",
]


class FockDiagError(Exception):
    """Base class for package-specific errors."""


class DomainError(FockDiagError, ValueError):
    """An argument lies outside its documented domain."""


class MissingAsppError(FockDiagError, LookupError):
    """A required averaged-overlap-power entry is absent from the table."""

    def __init__(self, m: int, k: int) -> None:
        self.m = int(m)
        self.k = int(k)
        super().__init__(
            f"missing averaged scalar-product power entry (m={self.m}, k={self.k})"
        )


class EnsembleError(FockDiagError, ValueError):
    """Internal-state ensembles are inconsistent (dimensions, weights, realness)."""


class ProbabilityError(FockDiagError, FloatingPointError):
    """A computed probability is negative beyond cancellation tolerance."""


class VisibilityUndefinedError(FockDiagError, ArithmeticError):
    """Visibility was requested for an identically vanishing signal."""


class RankDeficientError(FockDiagError):
    """The inference system lost rank; carries the numerical rank found."""

    def __init__(self, rank: int, needed: int) -> None:
        self.rank = int(rank)
        self.needed = int(needed)
        super().__init__(
            f"linear system is rank deficient: rank {self.rank}, need {self.needed}"
        )


class CountDataError(FockDiagError, ValueError):
    """Measurement records violate the estimator's requirements."""
