"""Exception types raised across the package."""


class VaboError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(VaboError, ValueError):
    """An argument has the wrong shape, range or value."""


class StateError(VaboError, RuntimeError):
    """An object is used before it is ready, or a precondition on
    accumulated state does not hold (e.g. no feasible point observed)."""


class NumericalError(VaboError, ArithmeticError):
    """A factorization failed even after jitter escalation."""

    def __init__(self, message, jitter=None):
        super().__init__(message)
        self.jitter = jitter


class ConfigError(VaboError):
    """Raised by config validation; carries every problem found."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
