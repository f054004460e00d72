"""Exception and warning types shared across the package."""

from __future__ import annotations


class AnnularEndsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(AnnularEndsError, ValueError):
    """A point, radius or sector lies outside the domain of validity."""


class RangeError(AnnularEndsError, ValueError):
    """Requested Fourier/Laurent indices violate the anti-aliasing bound."""


class NonMeromorphicSuspected(AnnularEndsError):
    """Coefficient estimates at two radii disagree, or do not truncate.

    Carries the agreement ``score`` so callers can report it.
    """

    def __init__(self, score: float, message: str | None = None):
        self.score = float(score)
        super().__init__(message or f"two-radius agreement score {score:.3e} above tolerance")


class ResolutionError(AnnularEndsError):
    """The grid is too coarse to separate distinct level arcs."""


class UndeterminedEnd(AnnularEndsError):
    def __init__(self, arc_id: int, message: str):
        self.arc_id = arc_id
        super().__init__(f"arc {arc_id}: {message}")


class InsufficientResolution(AnnularEndsError):
    """An arc has too few vertices for quadrature."""


class PreconditionError(AnnularEndsError, ValueError):
    """An operation was called on input that violates its precondition."""


class DegenerateMetric(AnnularEndsError):
    def __init__(self, vertex, value: float):
        self.vertex = vertex
        self.value = float(value)
        super().__init__(f"induced metric factor {value:.3e} degenerate at vertex {vertex}")


class WindingUnresolved(AnnularEndsError):
    """Phase increments too large to unwrap; increase the sample count."""


class BranchError(AnnularEndsError):
    """Logarithm branches could not be made consistent between radii."""


class SlicePeriodError(AnnularEndsError):
    def __init__(self, period: float, message: str | None = None):
        self.period = float(period)
        super().__init__(message or f"coordinate function is multivalued (period {period:.3e})")


class NumericalNonconvergence(AnnularEndsError):
    def __init__(self, message: str, residual: float | None = None):
        self.residual = residual
        super().__init__(message)


class SeedError(AnnularEndsError, ValueError):
    """Flood-fill seed does not satisfy the side condition."""


class ScenarioError(AnnularEndsError, ValueError):
    """Scenario configuration could not be parsed or validated."""


class CriticalLevel(UserWarning):
    """The traced level is within tolerance of a critical value."""
