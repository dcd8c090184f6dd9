"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class RangeError(LookupError):
    """A query exceeds the range covered by a precomputed table."""


class CapacityError(RuntimeError):
    """The request exceeds a configured resource or precision cap.

    Raised loudly instead of silently degrading; the message states the
    cap and, where meaningful, what would be required to satisfy the call.
    """


class CheckpointMismatch(RuntimeError):
    """A resume was attempted against a checkpoint written with different parameters."""
