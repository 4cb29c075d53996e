"""Exception types shared across the package."""


class GaschedError(Exception):
    """Base class for package-specific errors."""


class DimensionError(GaschedError, ValueError):
    """A genome or matrix has the wrong length/shape for the operation."""


class StateError(GaschedError, RuntimeError):
    """An operation was invoked on an object in an invalid state."""


class CapacityError(GaschedError, RuntimeError):
    """No free slot is available for the requested placement."""


class BudgetError(GaschedError, ValueError):
    """An enumeration would exceed the configured work budget."""


class ConfigError(GaschedError, ValueError):
    """Invalid configuration; the message names the offending key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
