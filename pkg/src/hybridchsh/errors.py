"""Exception types shared across the package."""


class DomainError(ValueError):
    """A physical parameter is outside its valid domain."""


class ConfigError(ValueError):
    """A run configuration file is missing, malformed, or inconsistent."""


class ConvergenceError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""
