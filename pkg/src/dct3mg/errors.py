"""Exception types raised across the package."""


class Dct3mgError(Exception):
    """Base class for errors raised by this package."""


class UsageError(Dct3mgError, ValueError):
    """Invalid arguments: bad sizes, unsupported zero locations, and so on."""


class ConsistencyError(Dct3mgError, ArithmeticError):
    """An internal invariant was violated (e.g. a coarse symbol needing negative mass)."""


class FactorizationError(Dct3mgError, ArithmeticError):
    """A symbol could not be factored as ``(1 - cos x)^q psi`` with positive ``psi``."""


class StructuralError(Dct3mgError):
    """A dense structural identity failed to hold."""
