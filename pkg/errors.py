"""
Exception hierarchy shared by the algebra, the solvers and the CLI.
"""
from typing import Optional, Sequence


class PTCubicError(Exception):
    """Base class for every error raised by this package."""


class UsageError(PTCubicError):
    """Invalid command line or configuration."""


class AlgebraError(PTCubicError):
    pass


class MetricSolverError(PTCubicError):
    def __init__(self, message: str, order: Optional[int] = None, free_parameters: Sequence[str] = ()):
        if order is not None:
            message = f"order {order}: {message}"
        super().__init__(message)
        self.order = order
        self.free_parameters = tuple(free_parameters)


class HermitianMapError(PTCubicError):
    pass


class DimensionalError(HermitianMapError):
    pass


class SpectralError(PTCubicError):
    pass


class ClassicalError(PTCubicError):
    pass


class DensityError(PTCubicError):
    pass


class VerificationError(PTCubicError):
    def __init__(self, message: str, failures: Sequence = ()):
        super().__init__(message)
        self.failures = list(failures)
