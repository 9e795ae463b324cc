"""Exception hierarchy shared by every subpackage.

The CLI maps each family onto its own exit code, so raise the most specific
class that applies.
"""


class HufError(Exception):
    """Base class for all library errors."""


class DimensionError(HufError, ValueError):
    """Tensor shapes are inconsistent with the requested operation."""


class NumericError(HufError, ArithmeticError):
    """A forward/backward pass or loss produced NaN or Inf."""


class ConfigError(HufError, ValueError):
    """Invalid hyperparameter or run configuration."""


class UsageError(HufError, RuntimeError):
    """API called out of order (e.g. backward before forward)."""


class DataError(HufError, ValueError):
    """Input files or arrays violate the expected dataset layout."""


class CheckpointError(HufError, IOError):
    """Checkpoint directory is corrupt, truncated or of the wrong version."""


class FreezeViolation(HufError, AssertionError):
    """A parameter marked frozen changed value."""
