"""Exception hierarchy shared by the solver modules and the CLI."""


class SsSvdError(Exception):
    """Base class. ``step`` is filled in by the pipeline when known."""

    step = None


class ConfigError(SsSvdError, ValueError):
    """Invalid parameters or input; the CLI maps this to exit code 2."""


class DomainError(ConfigError):
    pass


class MatrixMarketError(ConfigError):
    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class NumericalError(SsSvdError, ArithmeticError):
    """Numerical breakdown; the CLI maps this to exit code 3."""


class SingularShiftError(NumericalError):
    pass


class DegenerateSubspaceError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class CalibrationError(NumericalError):
    pass
