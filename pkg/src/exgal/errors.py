"""Exception hierarchy for exgal."""


class ExgalError(Exception):
    """Base class for all errors raised by this package."""


class ExpressionSyntaxError(ExgalError):
    """Raised when an expression string cannot be parsed.

    Carries the byte offset of the offending token in ``position``.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class EvalDomainError(ExgalError):
    """Raised when an expression is evaluated outside its domain.

    Covers division by zero, log of a non-positive number, sqrt of a
    negative number, invalid powers and non-finite results.
    """

    def __init__(self, message, point=None):
        if point is not None:
            message = f"{message} (at point {point!r})"
        super().__init__(message)
        self.point = point


class MeshError(ExgalError):
    """Invalid mesh construction request."""


class NotPositiveDefiniteError(ExgalError):
    """A matrix required to be SPD failed its factorization.

    Upstream this usually signals a violated coercivity hypothesis.
    """


class SingularMatrixError(ExgalError):
    """A square system is numerically singular.

    Upstream this signals violated discrete non-degeneracy.
    """


class ConvergenceError(ExgalError):
    """An iterative method did not reach its tolerance."""


class ScheduleError(ExgalError):
    """Invalid subdomain schedule (non-nested, or touching a singularity)."""


class ProbeSupportError(ExgalError):
    """A probe's support lies outside every scheduled subdomain."""


class ConfigError(ExgalError):
    """Invalid run configuration; names the offending key."""

    def __init__(self, key, message):
        super().__init__(f"config key '{key}': {message}")
        self.key = key
