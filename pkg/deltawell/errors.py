"""
Exception types raised by deltawell
"""


class DeltaWellError(Exception):
    """Base class for every error raised by the library"""


class DomainError(DeltaWellError, ValueError):
    """An argument lies outside the domain where the operation is defined"""


class RangeError(DomainError):
    """A tabulated spectral function was evaluated outside its grid"""


class UnsupportedError(DeltaWellError):
    """The requested evaluation path does not exist for this input"""


class ConvergenceError(DeltaWellError):
    """
    A numerical procedure stopped before reaching its tolerance

    Args:
        message (str): What failed
        estimate (float): Error estimate achieved when the procedure stopped
        tolerance (float): Tolerance that was requested
    """

    def __init__(self, message, estimate=float('nan'), tolerance=float('nan')):
        super().__init__(f"{message} (error estimate {estimate:.3e}, tolerance {tolerance:.3e})")
        self.estimate = estimate
        self.tolerance = tolerance


class InsufficientDataError(DeltaWellError):
    """Too few samples for a fit"""


class FitError(DeltaWellError):
    """Nonlinear least squares did not converge"""

    def __init__(self, message, residual=float('nan')):
        super().__init__(f"{message} (final residual {residual:.3e})")
        self.residual = residual


class ConfigError(DeltaWellError, ValueError):
    """Invalid run configuration; `field` names the offending setting"""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.reason = message
