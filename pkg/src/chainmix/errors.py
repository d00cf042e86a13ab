"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when input data or parameters violate a documented contract."""


class NumericalError(RuntimeError):
    """Raised when an iterative computation produces NaN/Inf or fails to converge.

    Carries the iteration index at which the failure was detected, when known.
    """

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration
