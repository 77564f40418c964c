"""Exception types raised across the package."""

from __future__ import annotations



class DomainError(ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class DivergenceError(DomainError):
    """The requested quantity is infinite at this argument (e.g. K(1))."""


class InfinitePeriodError(DomainError):
    """A periodic construction was requested for an aperiodic (kappa = 1) profile."""


class DegenerateMaterialError(DomainError):
    """The torsion law has a vanishing denominator for this material."""


class ConsistencyError(ValueError):
    """A profile's torsion disagrees with the torsion law of the material."""


class NoSolutionError(ValueError):
    """A root-finding problem has no admissible solution.

    ``threshold`` carries the feasibility bound when one is known.
    """

    def __init__(self, message: str, threshold: float | None = None):
        super().__init__(message)
        self.threshold = threshold


class IntegrationError(RuntimeError):
    """The frame integrator produced a non-finite state."""
