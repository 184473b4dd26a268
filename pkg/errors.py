"""
Exception hierarchy for the fixed-point toolkit
"""

from typing import Optional


class FixpointError(Exception):
    """Base class for every error raised by the toolkit"""
    pass


class ConfigError(FixpointError):
    """Configuration error"""
    pass


class NonFiniteValueError(FixpointError, ValueError):
    """A NaN or infinite value reached a place that only accepts finite numbers"""
    pass


class DomainMismatchError(FixpointError, ValueError):
    """Points from different domains (kinds or grids) were combined"""
    pass


class ConeViolationError(FixpointError, ValueError):
    """A value outside the cone S = {z : 0 ≾ z} was passed where S is required"""
    pass


class DivergenceError(FixpointError):
    """Iteration produced a non-finite or exploding point"""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class UsageError(FixpointError):
    """Bad command-line value; names the flag that carried it"""

    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag
        self.reason = message

    def one_line(self, prog: Optional[str] = None) -> str:
        prefix = f"{prog}: " if prog else ""
        return f"{prefix}error: {self.flag}: {self.reason}"
