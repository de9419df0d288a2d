"""Exception types shared across the toolkit."""


class ParameterError(ValueError):
    """Raised when protocol parameters violate their documented constraints."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver exhausts its iteration budget.

    Carries the last iterate so callers can inspect how close the solver got.
    """

    def __init__(self, message, solution=None, residual=None):
        super().__init__(message)
        self.solution = solution
        self.residual = residual
