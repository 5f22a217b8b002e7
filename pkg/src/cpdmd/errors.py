"""Exception hierarchy for the cpdmd package.

Every error carries an ``exit_code`` used by the command-line interface:
2 for data errors and 3 for numerical failures.
"""


class CpdmdError(Exception):
    """Base class for all package errors."""

    exit_code = 2


class DataError(CpdmdError, ValueError):
    """Malformed or inconsistent input data."""


class NumericalError(CpdmdError, ArithmeticError):
    """A numerical routine failed or met a degenerate configuration."""

    exit_code = 3


class NonFiniteError(DataError):
    pass


class ShapeMismatchError(DataError):
    pass


class RankOutOfRangeError(DataError):
    pass


class OrderOutOfRangeError(DataError):
    pass


class InsufficientHistoryError(DataError):
    pass


class NoValidRunsError(DataError):
    pass


class UnknownScenarioError(DataError):
    pass


class EmptyGridError(DataError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class DegenerateWindowError(NumericalError):
    pass


class AllCandidatesFailedError(NumericalError):
    pass


class DegenerateBurnInError(NumericalError):
    pass


class NonDiagonalisableError(NumericalError):
    pass


class ClosedFormMismatchError(NumericalError):
    pass
