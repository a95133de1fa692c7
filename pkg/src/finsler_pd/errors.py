"""Exception hierarchy shared by every module."""


class FinslerError(Exception):
    """Base class for library errors."""


class DomainError(FinslerError, ValueError):
    pass


class ZeroVector(FinslerError, ValueError):
    pass


class NotConvex(FinslerError):
    pass


class SingularMetric(FinslerError):
    pass


class NotNegativeDefinite(FinslerError):
    pass


class ChartExit(FinslerError):
    """Trajectory reached the chart boundary; ``path`` holds the partial result."""

    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


class StepTooLarge(FinslerError):
    pass


class CriticalPoint(FinslerError):
    pass


class GridMismatch(FinslerError, ValueError):
    pass


class DegenerateCoefficients(FinslerError, ValueError):
    pass


class NotNonoscillatory(FinslerError):
    pass


class CoverageGap(FinslerError):
    pass


class BrokenChain(FinslerError):
    pass


class ParameterNotGlobal(FinslerError):
    pass


class NoGeodesicFound(FinslerError):
    pass


class ConfigError(FinslerError, ValueError):
    pass
