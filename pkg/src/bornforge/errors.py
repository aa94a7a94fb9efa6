"""Exception types shared across the package."""


class CapacityError(ValueError):
    """Requested size exceeds what the dense simulator will allocate."""


class ShapeError(ValueError):
    """Array arguments have inconsistent or invalid shapes."""


class UsageError(ValueError):
    """An operation was invoked outside its contract."""


class ScoreUndefinedError(ValueError):
    """A score function was evaluated at a point where it is not defined."""


class ConfigError(ValueError):
    """A run configuration is invalid or internally inconsistent."""
