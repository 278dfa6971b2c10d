"""Exception and warning types shared across the package."""


class RobScatterError(Exception):
    """Base class for all package errors."""


class DomainError(RobScatterError, ValueError):
    """A scalar function was evaluated outside its domain."""


class ValidationError(RobScatterError, ValueError):
    """An input object violates a structural requirement."""


class ConfigError(ValidationError):
    """A model or experiment configuration is inconsistent."""


class NumericalError(RobScatterError, ArithmeticError):
    """A matrix became singular or ill-conditioned during a solve."""


class ConvergenceError(RobScatterError, RuntimeError):
    """A fixed-point or root-finding iteration did not converge.

    Attributes
    ----------
    residual : float
        Last residual reached before giving up.
    iterations : int
        Number of iterations performed.
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = float(residual)
        self.iterations = int(iterations)


class ModelWarning(UserWarning):
    """The model is valid but sits outside the regime where the theory applies."""
