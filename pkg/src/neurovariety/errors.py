"""Exception types shared across the package."""


class NeurovarietyError(Exception):
    """Base class for all package errors."""


class ShapeError(NeurovarietyError):
    """Operands have incompatible shapes (num_vars, degree, or matrix dims)."""


class DegreeMismatchError(ShapeError):
    """An exponent vector does not sum to the indexer's degree."""


class CapacityError(NeurovarietyError):
    """A result would exceed the configured coefficient-space capacity cap."""


class SingularScalingError(NeurovarietyError):
    """A diagonal scaling has a zero entry and cannot be inverted."""


class UnsupportedFieldError(NeurovarietyError):
    """The requested operation is not defined over the given scalar field."""


class ConditioningError(NeurovarietyError):
    """A numeric solve is too ill-conditioned to trust."""


class ComputationError(NeurovarietyError):
    """A computation failed after input validation succeeded."""
