"""bornforge: train diagonal-Ising Born machines against sample-based costs."""

__version__ = "0.1.0"

from ._core import BACKEND
from .errors import CapacityError, ConfigError, ScoreUndefinedError, ShapeError, UsageError

__all__ = [
    "BACKEND",
    "CapacityError",
    "ConfigError",
    "ScoreUndefinedError",
    "ShapeError",
    "UsageError",
    "__version__",
]
