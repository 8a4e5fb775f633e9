"""Exception hierarchy shared by all freestable modules."""


class FreeStableError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FreeStableError, ValueError):
    """Arguments outside the domain where an operation is defined."""


class PoleError(DomainError):
    """Evaluation exactly at a pole of a meromorphic function."""


class PrecisionError(FreeStableError, ArithmeticError):
    """Cancellation would destroy the requested accuracy."""


class ConvergenceError(FreeStableError, ArithmeticError):
    """An iterative method failed to converge."""


class BudgetError(FreeStableError, RuntimeError):
    """A quadrature ran out of its evaluation budget."""
