"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration value or combination of values is invalid."""


class GenerationError(RuntimeError):
    """A randomized graph construction failed within its retry budget."""
