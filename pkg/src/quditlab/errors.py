"""Exception types raised across the package."""


class QuditLabError(Exception):
    """Base class for all package errors."""


class InvalidState(QuditLabError, ValueError):
    pass


class DimMismatch(QuditLabError, ValueError):
    pass


class NotCommuting(QuditLabError, ValueError):
    pass


class DegenerateElimination(QuditLabError, ValueError):
    pass


class InvalidIndex(QuditLabError, IndexError):
    pass


class MissingCounts(QuditLabError, ValueError):
    pass


class InvalidTable(QuditLabError, ValueError):
    pass


class InvalidDimension(QuditLabError, ValueError):
    pass


class TrivialRegime(QuditLabError, ValueError):
    pass


class DegenerateBounds(QuditLabError, ValueError):
    pass


class IncompleteData(QuditLabError, ValueError):
    pass


class InvalidInput(QuditLabError, ValueError):
    pass


class Infeasible(QuditLabError, RuntimeError):
    pass


class NumericalFailure(QuditLabError, RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}
