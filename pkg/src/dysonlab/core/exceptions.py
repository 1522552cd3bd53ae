"""
Exception classes for Dyson Lab.

All errors raised by the laboratory derive from DysonLabException so the
command line can map them to exit codes in one place.
"""


class DysonLabException(Exception):
    """Base exception for all Dyson Lab errors."""
    pass


class ConfigError(DysonLabException):
    """Raised when configuration or experiment parameters are invalid."""
    pass


class CheckFailure(DysonLabException):
    """Raised when an embedded numerical assertion does not hold."""
    pass


class ValidationError(DysonLabException):
    """Raised when input data violates a type invariant."""
    pass


class NonFiniteInput(ValidationError):
    """Raised when a coordinate is NaN or infinite."""
    pass


class InvalidInterval(ValidationError):
    """Raised when an interval has its endpoints reversed."""
    pass


class DegenerateInterval(ValidationError):
    """Raised when a quadrature interval has no length."""
    pass


class OutOfWindow(ValidationError):
    """Raised when a point lies outside the closed window [-r, r]."""
    pass


class DegenerateDiagonal(ValidationError):
    """Raised when a tuple lies on the diagonal set."""
    pass


class EmptySet(ValidationError):
    """Raised when a set has no mass under the reference measure."""
    pass


class NonMonotone(ValidationError):
    """Raised when a quantile function is not strictly increasing."""
    pass


class MatchingError(DysonLabException):
    """Raised when a matching or transport problem cannot be posed."""
    pass


class InfiniteDistance(MatchingError):
    """Raised when an operation needs a finite matching distance."""
    pass


class TooLarge(MatchingError):
    """Raised when an exhaustive oracle is asked for too many points."""
    pass


class SizeMismatch(MatchingError):
    """Raised when two empirical laws have different member counts."""
    pass


class DynamicsError(DysonLabException):
    """Raised when a particle system leaves its state space."""
    pass


class Collision(DynamicsError):
    """Raised when two particles coincide."""
    pass


class SubstepExhausted(DynamicsError):
    """Raised when step halving exceeds the configured depth."""
    pass


class SolverError(DysonLabException):
    """Raised when an iterative solver fails."""
    pass


class NoConvergence(SolverError):
    """Raised when an iterative solver or sampler fails its convergence criterion."""
    pass
