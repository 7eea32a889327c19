"""Exception types shared by the library and the CLI."""


class ShcError(Exception):
    """Base class for all library errors."""


class DomainError(ShcError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(ShcError, RuntimeError):
    """An iteration did not converge within its step budget."""


class ToleranceError(ShcError, RuntimeError):
    """A quadrature did not reach the requested tolerance.

    ``estimate`` holds the achieved error estimate.
    """

    def __init__(self, message, estimate=float("nan"), value=float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.value = value


class BracketError(ShcError, RuntimeError):
    """A bracketing interval does not contain a sign change."""


class ConditioningError(ShcError, RuntimeError):
    """A linear system is too ill-conditioned to be trusted."""


class ContractError(ShcError, RuntimeError):
    """A numerical post-condition failed."""
