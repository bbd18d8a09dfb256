"""Exception types shared across the package."""

from __future__ import annotations


class DecError(Exception):
    """Base class for all package-specific errors."""


class InvalidOrderError(DecError, ValueError):
    """Requested order or node count outside the supported range."""


class InvalidParameterError(DecError, ValueError):
    """Scheme or problem parameter outside its admissible range."""


class SingularBasisError(DecError, ValueError):
    """Interpolation basis is degenerate (duplicate nodes)."""


class UnsupportedExportError(DecError, ValueError):
    """Scheme has no Runge-Kutta tableau in reduced form."""


class LumpingError(DecError, ValueError):
    """Lumped-mass path requested for a basis with nonpositive masses."""


class NumericalFailureError(DecError, RuntimeError):
    """Non-finite values produced during time stepping.

    Carries enough context to locate the failure: time, iteration and
    node indices, and (when stepping a trajectory) the step index.
    """

    def __init__(self, message: str, *, t: float | None = None,
                 iteration: int | None = None, node: int | None = None,
                 step_index: int | None = None):
        super().__init__(message)
        self.t = t
        self.iteration = iteration
        self.node = node
        self.step_index = step_index
