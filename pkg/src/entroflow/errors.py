"""Exception types shared across the package."""


class EntroflowError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(EntroflowError, ValueError):
    """A constructor or operation argument violates its precondition."""


class SingularParameterError(EntroflowError, ValueError):
    """A variance entry sits exactly on the log singularity h = 1/(2*gamma)."""


class RangeError(EntroflowError, ValueError):
    """Requested target lies outside the reachable range of a family."""

    def __init__(self, message: str, lo: float | None = None, hi: float | None = None):
        super().__init__(message)
        self.achievable = (lo, hi)


class DegenerateInputError(EntroflowError, ValueError):
    """Input is degenerate (zero matrix, all-excluded spectrum, constant data)."""


class IntegrationFailureError(EntroflowError, RuntimeError):
    """Stochastic integrator rejected too many steps; reduce the step size."""


class ConvergenceError(EntroflowError, RuntimeError):
    """An iterative evaluation failed to converge within its budget."""


class PoleError(EntroflowError, ValueError):
    """Special-function parameter hits a pole (e.g. 1F1 with b a non-positive integer)."""


class OutOfRegimeError(EntroflowError, ValueError):
    """Asymptotic evaluation requested outside its validity regime."""


class InvalidContextError(EntroflowError, ValueError):
    """A TheoryContext is missing data or violates its invariants."""


class InsufficientDataError(EntroflowError, ValueError):
    """Too few samples (or grid points) to build the requested statistic."""


class FitFailureError(EntroflowError, RuntimeError):
    """A single distribution fit failed to converge or produced invalid parameters."""


class AggregateFitError(EntroflowError, RuntimeError):
    """Every candidate family failed to fit; carries per-family diagnostics."""

    def __init__(self, diagnostics: dict):
        lines = "; ".join(f"{k}: {v}" for k, v in diagnostics.items())
        super().__init__(f"all candidate fits failed ({lines})")
        self.diagnostics = diagnostics
