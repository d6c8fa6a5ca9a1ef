"""Exception hierarchy shared by all modules.

Each class maps to one CLI exit code, see ``homdb.cli``.
"""


class HomdbError(Exception):
    """Base class for library errors."""


class PreconditionError(HomdbError, ValueError):
    """An argument violates a documented precondition."""


class PoleError(PreconditionError):
    """Argument within the exclusion radius of a pole."""


class ClassViolation(PreconditionError):
    """Parameters outside the class required by an operation."""


class NumericalError(HomdbError, ArithmeticError):
    """A numerical method failed to deliver a result."""


class ConvergenceError(NumericalError):
    """Series or limit did not converge within the allowed budget."""


class TruncationError(NumericalError):
    """Certified truncation bound exceeds the requested tolerance."""


class SectorError(PreconditionError):
    """Argument outside the validity sector of an asymptotic expansion."""


class StepSizeUnderflow(NumericalError):
    """Adaptive integrator step size fell below the floor."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class ToleranceBreach(HomdbError):
    """A check ran to completion but its residual exceeds the tolerance."""
