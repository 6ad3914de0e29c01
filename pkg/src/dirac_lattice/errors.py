"""Exception types shared across the package."""

from __future__ import annotations


class DiracLatticeError(Exception):
    """Base class for all domain errors."""


class ValidationError(DiracLatticeError, ValueError):
    """Invalid input (bad kinematics, malformed configuration)."""


class ConvergenceError(DiracLatticeError):
    """A sum or quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, error_estimate: float | None = None):
        super().__init__(message)
        self.error_estimate = error_estimate


class WoodAnomalyError(DiracLatticeError):
    """Kinematics too close to a vanishing diffraction-order wavenumber."""

    def __init__(self, message: str, order=None, gamma=None):
        super().__init__(message)
        self.order = order
        self.gamma = gamma


class PoleError(DiracLatticeError):
    """Evaluation requested exactly at a pole of a scattering quantity."""


class SingularSystemError(DiracLatticeError):
    """Multi-center system is singular or near-singular.

    Signals proximity to an intrinsic mode of the center arrangement;
    ``condition_estimate`` carries the estimated condition number.
    """

    def __init__(self, message: str, condition_estimate: float | None = None):
        super().__init__(message)
        self.condition_estimate = condition_estimate
