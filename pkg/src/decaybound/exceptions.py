class DecayBoundError(Exception):
    """Base class for all errors raised by this package."""


class InputError(DecayBoundError, ValueError):
    """Malformed or inconsistent user input (unknown vertex, bad parameter...)."""


class DomainError(DecayBoundError, ArithmeticError):
    """A quantity is undefined for the given parameters, e.g. a divergent K-norm."""


class ResourceError(DecayBoundError, MemoryError):
    """A Hilbert space exceeds the configured dimension cap."""


class NumericError(DecayBoundError, FloatingPointError):
    pass
