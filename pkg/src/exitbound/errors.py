"""Exception hierarchy shared across the package."""


class ExitBoundError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(ExitBoundError):
    """Invalid domain geometry (empty interval, non-positive radius, ...)."""


class EllipticityError(ExitBoundError):
    """Diffusion coefficient is not strictly positive on the domain."""


class ConfigurationError(ExitBoundError):
    """Invalid simulation or run configuration."""


class HorizonError(ExitBoundError):
    """A quantity is not identified below the simulation horizon t_max."""


class UnsupportedDimensionError(ExitBoundError):
    """Operation restricted to 1-D problems was called on a higher-dimensional one."""


class ExpressionError(ExitBoundError):
    """Syntax or evaluation error in a coefficient expression."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
