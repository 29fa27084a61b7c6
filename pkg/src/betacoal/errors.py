"""Exception hierarchy shared by the library and the CLI."""


class BetaCoalError(Exception):
    """Base class for all library errors."""


class RegimeError(BetaCoalError, ValueError):
    """Parameters fall outside the regime where an operation is defined."""


class ResourceCapError(BetaCoalError, RuntimeError):
    """Requested size exceeds a configured resource cap."""
