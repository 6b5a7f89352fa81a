"""Exception types raised by surfmod operations."""

__all__ = [
    "SurfmodError",
    "SingularMatrix",
    "DegenerateJacobian",
    "EvaluationFailure",
    "NonFiniteIntegrand",
    "InversionFailure",
    "InconsistentSubmersion",
    "NoConvergence",
    "InfeasibleSurface",
    "ConfigError",
]


class SurfmodError(Exception):
    """Base class for all errors raised by this package."""


class SingularMatrix(SurfmodError):
    """A matrix that must be invertible is singular or too ill-conditioned."""


class DegenerateJacobian(SurfmodError):
    """A Jacobian determinant or surface-area factor vanishes where it may not."""


class EvaluationFailure(SurfmodError):
    """A user-supplied map or Jacobian returned a non-finite or misshapen value."""


class NonFiniteIntegrand(SurfmodError):
    """An integrand evaluated to NaN, infinity, or an unusable underflow."""


class InversionFailure(SurfmodError):
    """Newton inversion of a parametrizing map did not converge."""


class InconsistentSubmersion(SurfmodError):
    """A submersion does not describe the level sets of the given family."""


class NoConvergence(SurfmodError):
    """An iterative solver hit its iteration cap before reaching tolerance."""


class InfeasibleSurface(SurfmodError):
    """A discrete surface has no mass, so no density can satisfy its constraint."""


class ConfigError(SurfmodError):
    """A run configuration is malformed or inconsistent."""
