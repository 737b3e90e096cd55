"""Exception hierarchy shared by all modules.

The CLI maps :class:`PreconditionError` subclasses to exit code 1 and
:class:`InvariantFailure` to exit code 2.
"""


class PreconditionError(ValueError):
    """An input violates a documented precondition."""


class ParameterError(PreconditionError):
    """Rejected parameter, e.g. an even Hecke index."""


class DomainError(PreconditionError):
    """Argument outside the mathematical domain of an operation."""


class CoverageError(PreconditionError):
    """Eigen-data does not cover every Hecke index a computation needs."""


class InfeasibleError(PreconditionError):
    """Too few free directions to satisfy the requested constraints."""


class KappaViolation(PreconditionError):
    """The sample-point set is not separated enough for the chosen kappa."""


class VanishingRestrictionError(PreconditionError):
    """A restriction to a great circle is identically zero."""


class InvariantFailure(RuntimeError):
    """An internal invariant failed; the message names it."""


class DegeneracyError(InvariantFailure):
    """Simultaneous diagonalization could not split an eigenspace."""


class SymmetryFailure(InvariantFailure):
    """An eigenfunction is not invariant under an expected reflection."""
