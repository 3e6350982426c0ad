"""
Exceptions for the pipelock package.
"""
from __future__ import annotations


class PipelockException(Exception):
    """Base exception class for pipelock exceptions."""

    __slots__ = ()


class TraceError(PipelockException):
    """Exception raised when a packet trace can not be read."""

    __slots__ = ()


class TraceFormatError(TraceError, ValueError):
    """Exception raised when a trace file or a synthetic trace spec is not in the expected format."""

    __slots__ = ()

    def __init__(self, message: str = "The trace is not in a supported format", *args):
        super(TraceFormatError, self).__init__(message, *args)


class TraceRowError(TraceError, ValueError):
    """Error raised when a single row of a CSV trace could not be parsed."""

    __slots__ = ('line',)

    def __init__(self, line: int, message: str = "Unparsable row", *args):
        super(TraceRowError, self).__init__("line %d: %s" % (line, message), *args)
        self.line = line


class ConfigurationError(PipelockException, ValueError):
    """Error raised when a simulation or experiment parameter is out of range."""

    __slots__ = ()

    def __init__(self, message: str = "Invalid configuration", *args):
        super(ConfigurationError, self).__init__(message, *args)


class HazardInvariantError(PipelockException, AssertionError):
    """Error raised when the locking scheduler admits two headers of the same compressed key
    inside the blocking window, i.e. when it lets a data hazard through."""

    __slots__ = ()

    def __init__(self, message: str = "Two headers with the same compressed key are in flight", *args):
        super(HazardInvariantError, self).__init__(message, *args)


class EmptySampleError(PipelockException, ValueError):
    """Error raised when a statistic is requested from an empty set of samples."""

    __slots__ = ()

    def __init__(self, message: str = "Cannot compute a percentile of an empty sample", *args):
        super(EmptySampleError, self).__init__(message, *args)
