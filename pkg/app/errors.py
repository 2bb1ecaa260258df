"""
Error types raised by the surface pipeline, and their CLI exit codes.
"""


class ThetaSurfaceError(Exception):
    """Base class for every error raised by this package."""


class ExpressionSyntaxError(ThetaSurfaceError):
    """Malformed expression source. ``offset`` is a byte offset into the source."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class DisallowedFunction(ExpressionSyntaxError):
    """A name that is not a holomorphic primitive, e.g. ``conj`` or ``abs``."""

    def __init__(self, name: str, offset: int):
        super().__init__(f"'{name}' is not an allowed holomorphic primitive", offset)
        self.name = name


class EvalSingularity(ThetaSurfaceError):
    pass


class ZeroVector(ThetaSurfaceError):
    pass


class InvalidDomain(ThetaSurfaceError):
    pass


class RegularityError(ThetaSurfaceError):
    """Surface data is singular somewhere on the validation grid."""

    def __init__(self, message: str, worst_node: complex | None = None):
        super().__init__(message)
        self.worst_node = worst_node


class QuadratureNoConvergence(ThetaSurfaceError):
    pass


class DegenerateMetric(ThetaSurfaceError):
    pass


class NewtonNoConvergence(ThetaSurfaceError):
    def __init__(self, message: str, last_iterate: complex):
        super().__init__(message)
        self.last_iterate = last_iterate


class InvalidHyperbolicPoint(ThetaSurfaceError):
    pass


class GridMismatch(ThetaSurfaceError):
    pass


class ConfigError(ThetaSurfaceError):
    pass


# Exit codes
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_REGULARITY = 3
EXIT_QUADRATURE = 4


def exit_code_for(error: Exception) -> int:
    """Map an error to the CLI exit code reported for it."""
    if isinstance(error, (ConfigError, ExpressionSyntaxError, GridMismatch, InvalidDomain)):
        return EXIT_CONFIG
    if isinstance(error, (RegularityError, EvalSingularity, DegenerateMetric)):
        return EXIT_REGULARITY
    if isinstance(error, QuadratureNoConvergence):
        return EXIT_QUADRATURE
    return EXIT_CHECK_FAILED
