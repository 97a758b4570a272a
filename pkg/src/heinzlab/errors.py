"""Exception hierarchy shared by every module."""


class HeinzlabError(Exception):
    """Base class for library errors."""


class DomainError(HeinzlabError, ValueError):
    """An input violates a documented precondition (p < 1, a <= 0, ...)."""


class DimensionError(DomainError):
    """Matrix operands are not conformable."""


class EvaluationError(HeinzlabError, ArithmeticError):
    """Floating-point evaluation failed (overflow, NaN).

    Never a sign that an inequality is false; the certifier counts these
    separately from violations.
    """


class ConvergenceError(EvaluationError):
    """The Jacobi eigensolver hit its sweep cap."""
