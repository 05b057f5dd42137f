"""Exception hierarchy.

Each concrete class maps onto one CLI exit status (see :mod:`mearray.cli`).
"""


class MeArrayError(Exception):
    """Base class for all package errors."""


class ValidationError(MeArrayError, ValueError):
    """An input violates a documented precondition or invariant."""


class DegenerateGeometryError(MeArrayError, ValueError):
    """Observation point coincides with a source (or the array centroid)."""


class InconsistencyError(MeArrayError, ValueError):
    """A derived quantity falls outside its mathematically allowed range."""


class SolverError(MeArrayError, RuntimeError):
    """Retarded-time solve failed; usually a superluminal trajectory."""


class ConfigParseError(MeArrayError):
    """Config document is not well-formed."""


class ConfigValidationError(ValidationError):
    """Config document parsed but a field is missing or invalid."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class FarFieldWarning(UserWarning):
    """Observation distance is below 10x the array aperture."""


class LowVelocityWarning(UserWarning):
    """Low-velocity field requested for a charge with beta >= 0.01."""
