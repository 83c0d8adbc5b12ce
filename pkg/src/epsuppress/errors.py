"""Exception hierarchy. The CLI maps each branch to a distinct exit code."""


class EpsError(Exception):
    """Base class for all package errors."""


class ConfigError(EpsError, ValueError):
    """Malformed or out-of-range experiment configuration."""


class PhysicsContractError(EpsError):
    """A physical precondition of a formula is violated."""


class CodeError(PhysicsContractError, ValueError):
    """Invalid stabilizer code or logical-operator map."""


class DetectionError(PhysicsContractError):
    """The code fails to detect some coupling operator."""

    def __init__(self, message, unsuppressed=0.0):
        super().__init__(message)
        self.unsuppressed = unsuppressed


class GroundStateError(PhysicsContractError, ValueError):
    """Initial state not supported on the ground subspace, or ground level changed rank."""


class NumericalError(EpsError):
    """Numerical method failed to meet its accuracy contract."""


class AmbiguousGroupingError(NumericalError):
    """Eigenvalues or Bohr frequencies cluster at a scale between noise and tolerance."""


class QuadratureError(NumericalError):
    """Principal-value quadrature did not converge."""


class IntegratorError(NumericalError):
    """Time integration unstable or inaccurate."""
