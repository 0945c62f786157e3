"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes (2 invalid input, 3 capacity,
4 numerical failure).
"""


class LandscapeQuboError(Exception):
    """Base class for all package errors."""


class InvalidInputError(LandscapeQuboError, ValueError):
    """Malformed or out-of-contract argument."""


class CapacityError(LandscapeQuboError):
    """Problem size exceeds what an operation supports."""


class NumericalError(LandscapeQuboError, ArithmeticError):
    """A numerical procedure could not produce a meaningful result."""


class NotConvergedError(NumericalError):
    """Iterative solver stopped before reaching its tolerance.

    The best iterate is kept on ``result`` so callers can inspect it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class SingularSpectrumError(NumericalError):
    pass


class SingularOverlapError(NumericalError):
    pass


class BoundNotApplicableError(NumericalError):
    """The operator fails the validity conditions the amplitude bound needs."""
