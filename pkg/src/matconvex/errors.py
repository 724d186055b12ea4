"""Exception hierarchy shared by all matconvex modules."""


class MatConvexError(Exception):
    """Base class for every error raised by the package."""


class DomainError(MatConvexError, ValueError):
    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class ParseError(MatConvexError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class OrderCap(MatConvexError, ValueError):
    pass


class InvalidPerturber(MatConvexError, ValueError):
    pass


class NoPositiveWindow(MatConvexError):
    pass


class PositivityError(MatConvexError):
    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class HypothesisError(MatConvexError, ValueError):
    pass


class NotMonotone(MatConvexError):
    pass


class UnboundedInterval(MatConvexError, ValueError):
    pass


class SpectrumOutOfDomain(DomainError):
    pass


class NotComparable(MatConvexError, ValueError):
    pass


class PreconditionError(MatConvexError, ValueError):
    """Raised when an argument violates an operation's stated contract."""


class SearchExhausted(MatConvexError):
    def __init__(self, message: str, best=None, worst_minor: float | None = None):
        super().__init__(message)
        self.best = best
        self.worst_minor = worst_minor
