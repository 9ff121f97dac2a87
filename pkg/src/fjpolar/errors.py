"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input data violates a structural requirement."""


class ConvergenceError(ArithmeticError):
    """An iteration or a linear solve did not reach a usable answer.

    Parameters
    ----------
    message : str
    residual : float, optional
        Last measured residual, when one exists.
    last : ndarray, optional
        Last iterate, when one exists.
    """

    def __init__(self, message, residual=None, last=None):
        super().__init__(message)
        self.residual = residual
        self.last = last


class NumericalError(ArithmeticError):
    """A computed quantity failed its own consistency check."""


class NotPolarizing(Exception):
    """The model cannot polarize for the requested metric, so no candidate exists."""


class Unavailable(Exception):
    """A candidate is not defined for this model or exceeds the size limits."""
