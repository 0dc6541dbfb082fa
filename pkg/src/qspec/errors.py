"""Exception types shared across the package."""


class QSpecError(Exception):
    """Base class for all package errors."""


class InvalidInputError(QSpecError, ValueError):
    pass


class PreconditionError(QSpecError, ValueError):
    """An operation was called on data that violates its contract (e.g. an
    unnormalized rule passed to the Rayleigh bound)."""


class ResourceError(QSpecError, RuntimeError):
    """A series would need more terms than the hard cap allows."""
