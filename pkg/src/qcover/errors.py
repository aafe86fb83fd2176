"""Exception types shared across the toolkit.

Plain ``ValueError`` is used for ordinary argument validation (bad labels,
out-of-range levels, malformed matrices).  The classes below mark the
failure modes that callers may want to handle separately.
"""


class SpaceMismatchError(ValueError):
    """Operands belong to history spaces of different sizes."""


class ResourceLimitError(RuntimeError):
    """An exhaustive enumeration would exceed its declared size cap."""


class InfeasibleNormalizationError(ValueError):
    """Rescaling to unit total measure was requested but the total measure
    is forced to zero by the annihilated events."""


class NoCoeventError(RuntimeError):
    """The whole space is precluded, so no preclusive coevent exists."""


class ConsistencyError(RuntimeError):
    """An internal invariant failed.  Always a bug, never a user error."""
