"""Exception and warning types shared across the package."""


class QRabiError(Exception):
    """Base class for all package errors."""


class DimensionError(QRabiError, ValueError):
    pass


class ComputationError(QRabiError, RuntimeError):
    """A numerical routine failed (eigensolver, series, convergence)."""


class ConvergenceError(ComputationError):
    pass


class PoleProximityError(QRabiError, ValueError):
    pass


class SeriesConvergenceError(ComputationError):
    pass


class MissedRootError(ComputationError):
    pass


class RepresentationMismatchError(ComputationError):
    pass


class ThresholdError(QRabiError, ValueError):
    pass


class TruncationWarning(UserWarning):
    """Displaced or coherent state is not well contained in the truncated basis."""


class DegeneracyWarning(UserWarning):
    pass


class CoverageWarning(UserWarning):
    pass
