"""Exception hierarchy shared across the package."""


class KinsmoothError(Exception):
    """Base class for all package errors."""


class ContractError(KinsmoothError, ValueError):
    """An argument violates a documented shape or value contract."""


class MultiplierOverflowError(KinsmoothError, ArithmeticError):
    """A Fourier multiplier is non-finite somewhere on the lattice.

    Use a delta-regularized weight or the log-space norm instead.
    """


class DegenerateStateError(KinsmoothError, ValueError):
    """The state has (numerically) zero mass or degenerate temperatures."""


class DomainTooSmallError(KinsmoothError, ValueError):
    """The velocity box cannot accommodate the requested operation."""


class ConfigurationError(KinsmoothError, ValueError):
    """Solver or verification parameters are outside their admissible range."""


class QuadratureError(KinsmoothError, ArithmeticError):
    """An adaptive quadrature failed to reach its tolerance."""

    def __init__(self, message, *, max_error=None, n_failed=None):
        super().__init__(message)
        self.max_error = max_error
        self.n_failed = n_failed


class NumericalError(KinsmoothError, ArithmeticError):
    """A time integration produced non-finite or unphysical values.

    ``last_time`` and ``last_state`` hold the last good state, when known.
    """

    def __init__(self, message, *, last_time=None, last_state=None):
        super().__init__(message)
        self.last_time = last_time
        self.last_state = last_state
