"""Exception hierarchy shared by every analysis module."""


class FedinetError(Exception):
    """Base class for all errors raised by fedinet."""

    exit_code = 2


class ValidationError(FedinetError, ValueError):
    exit_code = 1


class ParseError(ValidationError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class ConfigurationError(ValidationError):
    pass


class UndefinedStatisticError(FedinetError, ArithmeticError):
    """A statistic is mathematically undefined for the given input."""


class FitError(ValidationError):
    """Sample cannot be fitted (empty after truncation, degenerate, too small)."""


class ConvergenceError(FedinetError, RuntimeError):
    exit_code = 3

    def __init__(self, message, residual=None, iterations=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class OracleRefused(FedinetError):
    """Input too large for a brute-force oracle's complexity bound."""
