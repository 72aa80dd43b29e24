"""Exception hierarchy shared by every module."""


class BuckPassError(Exception):
    """Base class for all errors raised by buckpass."""


class InputError(BuckPassError, ValueError):
    """Malformed or invalid user input.

    ``field`` names the offending JSON field (or parameter) when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class GraphParseError(InputError):
    """Invalid graph document. ``vertex`` is the offending vertex, if any."""

    def __init__(self, message, vertex=None, field="edges"):
        super().__init__(message, field=field)
        self.vertex = vertex


class LoopEdgeError(GraphParseError):
    pass


class DuplicateEdgeError(GraphParseError):
    pass


class EmptyOutNeighborsError(GraphParseError):
    pass


class MeasureError(GraphParseError):
    def __init__(self, message, vertex=None):
        super().__init__(message, vertex=vertex, field="mu")


class CapExceededError(BuckPassError, ValueError):
    """An exhaustive enumeration would exceed its configured cap."""


class PreconditionError(BuckPassError, ValueError):
    """An operation was called outside its documented domain."""


class ContractViolation(PreconditionError):
    """Structural contract broken, e.g. a restriction with several classes."""


class NumericError(BuckPassError, ArithmeticError):
    """A numerical routine failed its own residual or agreement check."""


class ConsistencyError(BuckPassError, RuntimeError):
    """Internal-consistency failure: a proven guarantee did not hold."""
