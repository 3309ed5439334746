"""Exception types shared across the package."""


class NotFound(KeyError):
    """An id is not live in the structure it was looked up in."""


class InvalidArgument(ValueError):
    pass


class InvalidState(RuntimeError):
    """Raised on duplicate inserts or operations issued at the wrong time."""


class BoundsViolation(ValueError):
    """A new point would break the configured d_min/d_max range."""


class BudgetExceeded(RuntimeError):
    """An exhaustive oracle was asked to enumerate beyond its budget."""
