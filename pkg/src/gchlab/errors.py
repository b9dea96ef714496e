"""Shared exception types."""


class ConfigError(ValueError):
    """Bad configuration: malformed file, unknown key, unusable parameter."""


class DivergedError(RuntimeError):
    """A state became nonfinite or a trajectory left its admissible region."""


class EstimationError(RuntimeError):
    """A fit was requested on data that cannot support it."""
