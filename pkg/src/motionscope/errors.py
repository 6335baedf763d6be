"""Exception types shared across the engine."""


class MotionscopeError(Exception):
    """Base class for engine errors."""


class ValidationError(MotionscopeError):
    """A parameter or configuration violates its contract.

    ``field`` carries a dotted path (e.g. ``display.hold_interval``) so callers
    can surface field-level messages.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ResourceLimitError(MotionscopeError):
    """The requested discretization exceeds the configured memory budget."""
