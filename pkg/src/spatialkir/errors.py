"""Exception hierarchy.

Two families: :class:`ValidationError` for bad inputs or configuration
(CLI exit code 2) and :class:`NumericalError` for failures of the numerics
on otherwise valid input (CLI exit code 3).
"""


class SpatialKIRError(Exception):
    exit_code = 1


class ValidationError(SpatialKIRError, ValueError):
    exit_code = 2


class NumericalError(SpatialKIRError, ArithmeticError):
    exit_code = 3


class InsufficientRegion(ValidationError):
    pass


class OutOfRegion(ValidationError):
    pass


class EmptyRegion(ValidationError):
    pass


class EmptyDataset(ValidationError):
    pass


class DegenerateDataset(ValidationError):
    pass


class InvalidKernel(ValidationError):
    pass


class InvalidSchedule(ValidationError):
    pass


class InvalidThreshold(ValidationError):
    pass


class InsufficientReplicates(ValidationError):
    pass


class InsufficientSizes(ValidationError):
    pass


class UndefinedSubspace(ValidationError):
    pass


class SingularCovariance(NumericalError):
    pass


class NoSignal(NumericalError):
    """All inverse-regression eigenvalues vanish, so no direction is selected."""
