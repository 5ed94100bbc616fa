"""Exception hierarchy shared by every module."""


class FracineqError(Exception):
    """Base class for all library errors."""


class DomainError(FracineqError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ParseError(FracineqError, ValueError):
    """Expression text could not be parsed.

    Carries the byte offset of the failure and a description of what
    would have been accepted there.
    """

    def __init__(self, message: str, position: int, expected: str = ""):
        self.position = position
        self.expected = expected
        detail = f"{message} at offset {position}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


class EvaluationError(FracineqError, ArithmeticError):
    """An expression hit a domain violation while being evaluated.

    Identifies the offending node by kind and source offset.
    """

    def __init__(self, message: str, node_kind: str = "", position: int = -1):
        self.node_kind = node_kind
        self.position = position
        detail = message
        if node_kind:
            detail += f" in '{node_kind}' node"
        if position >= 0:
            detail += f" at offset {position}"
        super().__init__(detail)


class IntegrandError(FracineqError, ArithmeticError):
    """The integrand returned a non-finite value in the interior."""


class ConvergenceError(FracineqError, ArithmeticError):
    """Quadrature failed to reach tolerance; carries the best estimate."""

    def __init__(self, message: str, best_value: float, err_estimate: float,
                 evaluations: int):
        self.best_value = best_value
        self.err_estimate = err_estimate
        self.evaluations = evaluations
        super().__init__(
            f"{message} (best estimate {best_value!r}, "
            f"err {err_estimate!r}, {evaluations} evaluations)")


class ConfigError(FracineqError, ValueError):
    """A sweep configuration file violates the documented schema."""
