"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class CurvRigidError(Exception):
    """Base class for every error raised by the package."""


class DimMismatch(CurvRigidError, ValueError):
    pass


class NotSymmetric(CurvRigidError, ValueError):
    pass


class NotSkew(CurvRigidError, ValueError):
    pass


class NonFinite(CurvRigidError, ValueError):
    pass


class AlgebraMismatch(CurvRigidError, ValueError):
    pass


class BianchiViolated(CurvRigidError, ValueError):
    """Raised when an operator fails the first Bianchi identity.

    ``residual`` carries the size of the violation (or of a witness computed
    from it) so callers can report how badly the hypothesis fails.
    """

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class NotPSD(CurvRigidError, ValueError):
    pass


class ClaimsMismatch(CurvRigidError, ValueError):
    """A fixture file states flags that re-verification does not confirm."""


class RicciDegenerate(CurvRigidError, ValueError):
    pass


class NoConvergence(CurvRigidError, RuntimeError):
    pass


class QuaternionicDetected(CurvRigidError, ValueError):
    pass


class CommutantAnomalous(CurvRigidError, ValueError):
    pass


class ProjectionNotPSD(CurvRigidError, RuntimeError):
    pass


class ImageMismatch(CurvRigidError, RuntimeError):
    pass


class NotScalar(CurvRigidError, RuntimeError):
    pass


class WrongSlot(CurvRigidError, ValueError):
    pass


class MissingCurvature(CurvRigidError, ValueError):
    pass


class CapExceeded(CurvRigidError, RuntimeError):
    pass


class SeparatorFailed(CurvRigidError, RuntimeError):
    def __init__(self, message: str, rho_residual: float, ad_residual: float):
        super().__init__(message)
        self.rho_residual = rho_residual
        self.ad_residual = ad_residual


class PreconditionFailed(CurvRigidError, ValueError):
    def __init__(self, message: str, relation: str):
        super().__init__(message)
        self.relation = relation
