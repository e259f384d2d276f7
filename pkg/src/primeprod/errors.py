"""Exception types shared across the package."""


class PrimeprodError(Exception):
    """Base class for errors raised by primeprod."""


class ResourceLimitError(PrimeprodError):
    """A computation would exceed a configured ceiling (sieve size, search bound)."""


class DegenerateInputError(PrimeprodError, ValueError):
    """Input is well formed but the requested quantity is undefined for it."""
