"""Exception hierarchy shared across the package."""


class BerrygateError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(BerrygateError, ValueError):
    """A physical or numerical parameter violates its contract."""


class IntegrationError(BerrygateError, RuntimeError):
    """The adaptive propagator failed (step underflow, tolerance failure)."""

    def __init__(self, message, t=None, step=None):
        super().__init__(message)
        self.t = t
        self.step = step


class NonCyclicEvolutionError(BerrygateError, RuntimeError):
    """Ground-state return population fell below the cyclicity threshold."""

    def __init__(self, message, return_population=None):
        super().__init__(message)
        self.return_population = return_population


class FitError(BerrygateError, RuntimeError):
    """A least-squares fit could not be performed on the given samples."""


class ConfigError(BerrygateError, ValueError):
    """A run configuration failed schema validation or is inconsistent."""
