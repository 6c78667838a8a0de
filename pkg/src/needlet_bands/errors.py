class InvalidInputError(ValueError):
    """Raised when an argument violates a documented precondition."""


class ConfigError(ValueError):
    """Raised for an experiment configuration that cannot be run."""
