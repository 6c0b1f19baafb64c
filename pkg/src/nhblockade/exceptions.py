"""Exception types raised across the package."""


class LayoutMismatchError(ValueError):
    """Two operators (or an operator and a state) live on different Fock layouts."""


class ConvergenceError(RuntimeError):
    """A steady-state solve did not reach its residual tolerance.

    The last residual and the integration time are kept so callers can flag
    the point instead of discarding it.
    """

    def __init__(self, message, residual=None, t=None):
        super().__init__(message)
        self.residual = residual
        self.t = t


class DegenerateSteadyStateError(RuntimeError):
    """The rightmost Liouvillian eigenvalue is not simple."""

    def __init__(self, message, multiplicity=None, eigenvalues=None):
        super().__init__(message)
        self.multiplicity = multiplicity
        self.eigenvalues = eigenvalues


class PositivityError(RuntimeError):
    """A converged density matrix has an eigenvalue below the positivity floor."""


class UndefinedCorrelationError(ValueError):
    """g2(0) requested for a mode with zero occupation."""


class ConditionNotFoundError(ValueError):
    """An optimal-condition solver found no admissible angle/detuning."""


class DivergenceError(ArithmeticError):
    """A closed-form weak-drive quantity diverges at the requested parameters."""
