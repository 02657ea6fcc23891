"""Exception hierarchy shared by every module in the package."""


class OmtlError(Exception):
    """Base class for all package errors."""


class InvalidInputError(OmtlError, ValueError):
    """An argument violates a documented precondition."""


class UndefinedCorrelationError(InvalidInputError):
    """Rank correlation requested on a constant series."""


class SingularMatrixError(OmtlError, ArithmeticError):
    """A linear system is singular or too ill-conditioned to solve reliably."""


class NumericalBreakdownError(OmtlError, ArithmeticError):
    """A recursion produced a non-positive denominator or non-finite value.

    ``step`` holds the zero-based stream index when the failure happened
    inside a batched run, otherwise ``None``.
    """

    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class CapacityError(OmtlError):
    """A configured size cap (stacked dimension, dictionary size) was exceeded."""


class ParseError(InvalidInputError):
    """Malformed tabular input; ``row`` and ``col`` are 1-based file positions."""

    def __init__(self, message, row=None, col=None):
        where = ""
        if row is not None:
            where = f" at row {row}" + (f", column {col}" if col is not None else "")
        super().__init__(message + where)
        self.row = row
        self.col = col


class GridSearchError(OmtlError):
    """Every hyperparameter candidate failed; ``failures`` maps candidate to reason."""

    def __init__(self, failures):
        lines = "; ".join(f"{k}: {v}" for k, v in list(failures.items())[:5])
        super().__init__(f"all {len(failures)} grid candidates failed ({lines})")
        self.failures = failures
