"""Exception types raised by the pricing engine."""


class PhShareError(Exception):
    """Base class for all package errors."""


class DomainError(PhShareError, ValueError):
    """An argument lies outside the domain of the operation."""


class NumericError(PhShareError, ArithmeticError):
    """A numerical routine produced or encountered a non-finite value."""

    def __init__(self, message, abscissa=None):
        super().__init__(message)
        self.abscissa = abscissa


class BracketError(PhShareError, ValueError):
    """Root finding was given an interval without a sign change."""


class ConvergenceError(PhShareError, RuntimeError):
    """An iteration failed to converge.  ``last`` holds the final iterates."""

    def __init__(self, message, last=()):
        super().__init__(message)
        self.last = tuple(last)


class UnsupportedMarketError(PhShareError, ValueError):
    """The market shape is not supported by the requested pricing regime."""


class InvalidMarketError(PhShareError, ValueError):
    """Market parameters violate a structural precondition (e.g. type ordering)."""


class InfeasibleMarketError(PhShareError, ValueError):
    """No admissible price exists (reservation utility above the roaming fee)."""


class ConfigError(PhShareError, ValueError):
    """Configuration file could not be parsed or validated."""

    def __init__(self, message, field=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.field = field
        self.line = line
