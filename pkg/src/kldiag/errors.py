"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration or command usage (CLI exit code 1)."""


class DataError(ValueError):
    """Malformed or inconsistent input data (CLI exit code 2)."""
