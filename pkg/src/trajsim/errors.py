"""Exception hierarchy shared by every trajsim module."""

from __future__ import annotations


class TrajSimError(Exception):
    """Base class for all trajsim errors."""


class ParameterError(TrajSimError, ValueError):
    """A measure, transform or query received an invalid parameter."""


class EmptyTrajectoryError(TrajSimError, ValueError):
    pass


class LengthMismatchError(TrajSimError, ValueError):
    pass


class InsufficientSegmentsError(TrajSimError, ValueError):
    pass


class DegeneratePolygonError(TrajSimError, ValueError):
    pass


class NetworkError(TrajSimError, ValueError):
    """Malformed road network (dangling endpoint, duplicate id, bad length)."""


class UnknownVertexError(NetworkError, KeyError):
    pass


class UnreachableError(TrajSimError):
    """A network measure needed the distance between two disconnected vertices."""

    def __init__(self, u, v):
        super().__init__(f"vertex {v} is unreachable from vertex {u}")
        self.u = u
        self.v = v


class UndefinedRatioError(TrajSimError, ZeroDivisionError):
    pass


class DataError(TrajSimError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class BudgetExceededError(TrajSimError):
    pass
