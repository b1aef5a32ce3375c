"""Base exception types shared across trpcalab."""


class TrpcaLabError(Exception):
    """Base class for all errors raised by trpcalab."""
    pass


class ShapeMismatchError(TrpcaLabError, ValueError):
    """Raised when tensor shapes are incompatible for an operation."""
    pass
