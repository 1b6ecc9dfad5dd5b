"""Exception hierarchy shared by every module."""


class KposError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(KposError, ValueError):
    pass


class SizeError(KposError, ValueError):
    pass


class ParameterError(KposError, ValueError):
    pass


class DomainError(KposError, ValueError):
    pass


class NumericalError(KposError, ArithmeticError):
    """A factorization or iterative method failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SolverError(NumericalError):
    """A conic program ended with a non-optimal status."""


class SamplingError(NumericalError):
    pass
