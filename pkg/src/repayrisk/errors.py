"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a function or model."""


class ConvergenceError(ArithmeticError):
    """An iterative method hit its iteration cap without converging."""


class ConfigError(ValueError):
    """A configuration is malformed. ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)
