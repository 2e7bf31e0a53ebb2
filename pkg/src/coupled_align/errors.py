"""Exception hierarchy shared by every module.

The CLI maps :class:`DataError` to exit code 3 and :class:`NumericError` to
exit code 4; :class:`ConfigError` is a usage error (exit code 2).
"""


class CoupledAlignError(Exception):
    """Base class for all package errors."""


class ConfigError(CoupledAlignError, ValueError):
    """A parameter violates its documented precondition."""


class DataError(CoupledAlignError, ValueError):
    """Malformed or inconsistent input data (shapes, CSV content, graphs)."""


class ParseError(DataError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


class IsolatedVertex(DataError):
    """A vertex has zero degree; rebuild the graph with a larger epsilon or k."""

    def __init__(self, index):
        super().__init__(
            f"vertex {index} is isolated (zero degree); increase epsilon or k"
        )
        self.index = index


class NumericError(CoupledAlignError, ArithmeticError):
    """A numerical precondition or convergence requirement failed."""


class NotHermitianError(NumericError):
    pass


class NotNormalError(NumericError):
    pass


class NormalizationError(NumericError):
    """An eigenvector cannot be scaled so that (D e, e) equals exp(i theta)."""


class ConvergenceError(NumericError):
    pass


class IdentityViolation(NumericError, AssertionError):
    """Two routes to the same quantity disagree beyond tolerance."""

    def __init__(self, name, lhs, rhs):
        super().__init__(f"{name}: {lhs!r} != {rhs!r}")
        self.lhs = lhs
        self.rhs = rhs
