"""Exception types shared across the package."""


class GreenlabError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(GreenlabError):
    """A construction parameter violates its invariant."""


class ConvergenceError(GreenlabError):
    """An iterative solver ran out of budget.

    ``residual`` carries the best residual reached so callers can report it.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class UnsupportedConfigError(GreenlabError):
    """A combination of backend and operator that the lab does not build."""


class HermiticityError(GreenlabError):
    """An assembled operator failed the weighted-Hermiticity check."""


class ConfigError(GreenlabError):
    """A malformed experiment configuration; ``key`` names the offender."""

    def __init__(self, key, message):
        super().__init__(f"config key '{key}': {message}")
        self.key = key
