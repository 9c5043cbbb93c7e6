"""Exception hierarchy shared by every module."""


class NullprojError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(NullprojError, ValueError):
    """A parameter is outside its admissible range."""


class NumericalError(NullprojError, ArithmeticError):
    """A factorization failed or produced non-finite values."""


class NotFoundError(NullprojError, LookupError):
    """An exhaustive search finished without a feasible answer."""


class GuardExceededError(InvalidParameterError):
    """An exhaustive routine was asked for a problem larger than it allows."""


class ConfigError(NullprojError, ValueError):
    """An experiment or solver configuration is malformed."""
