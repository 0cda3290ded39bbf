"""Shared exception types."""


class CapacityError(Exception):
    """Raised when a request exceeds a configured size/memory cap.

    The message always names the cap that was hit, so callers (and the CLI,
    which maps this to exit code 3) can report something actionable.
    """
