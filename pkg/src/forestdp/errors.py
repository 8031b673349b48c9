"""Exception hierarchy shared by every module of the package."""


class ForestDPError(Exception):
    """Base class for all package errors."""


class GraphParseError(ForestDPError, ValueError):
    """Malformed edge-list input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class VertexRangeError(ForestDPError, IndexError):
    """A vertex id outside ``[0, n)``."""


class CapacityError(ForestDPError, ValueError):
    """Input too large for an exponential-time oracle."""


class ContractViolation(ForestDPError, RuntimeError):
    """A documented precondition turned out to be false mid-computation."""


class ParameterError(ForestDPError, ValueError):
    """Invalid numeric parameter (non-positive scale, empty index set, ...)."""


class LpError(ForestDPError, RuntimeError):
    """The LP subroutine reported infeasibility, unboundedness or failure."""


class ConvergenceError(ForestDPError, RuntimeError):
    """Cutting-plane loop hit its iteration cap.

    The last (possibly infeasible) certificate is kept on ``certificate``.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate
