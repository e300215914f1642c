"""Exception types shared across the package."""


class RisForgeError(Exception):
    """Base class for all package errors."""


class DimensionError(RisForgeError):
    """Matrix or vector dimensions are inconsistent with the operation."""


class ParameterError(RisForgeError):
    """A scalar or vector parameter is outside its valid range."""


class GeometryError(RisForgeError):
    """Array geometry or propagation distances are invalid."""


class DegenerateInputError(RisForgeError):
    """The input matrix is identically zero, so the quantity is undefined."""


class SingularChannelError(RisForgeError):
    """The channel matrix is rank deficient and cannot be inverted."""


class CapacityError(RisForgeError):
    """The requested exhaustive search exceeds the enumeration guard."""
