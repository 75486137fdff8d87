"""Exception hierarchy shared by all shapedepth modules."""


class ShapeDepthError(Exception):
    """Base class for errors raised by this package."""


class DomainError(ShapeDepthError, ValueError):
    """Input outside the domain of an operation (non-SPD matrix, empty cloud, ...)."""


class DimensionError(DomainError):
    """Inconsistent dimensions between data, location and shape."""


class UnsupportedDimensionError(DomainError):
    """Operation only defined for a particular dimension."""


class DegeneracyError(ShapeDepthError, RuntimeError):
    """Every candidate produced a singular configuration."""


class ConvergenceError(ShapeDepthError, RuntimeError):
    """Iterative procedure did not reach its tolerance.

    Attributes
    ----------
    residual : float
        Residual at the last iterate.
    iterations : int
        Number of iterations performed.
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
