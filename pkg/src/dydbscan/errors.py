"""Exception types shared across the package."""


class UsageError(ValueError):
    """A caller violated an operation's precondition (bad handle, duplicate id, ...)."""


class InputError(ValueError):
    """Data handed to the library is malformed (wrong dimension, NaN, unparsable)."""


class InvariantError(AssertionError):
    """An internal consistency check failed."""
