"""Exception hierarchy shared by all core modules."""


class PlancherelError(Exception):
    """Base class for every error raised by pyplancherel."""


class DomainError(PlancherelError, ValueError):
    """An argument lies outside the documented domain of an operation."""


class GuardError(DomainError):
    """A documented size guard (degree, window, enumeration, cutoff) was exceeded."""


class NumericError(PlancherelError, ArithmeticError):
    """A numerical procedure failed: no convergence, degeneracy, lost accuracy.

    'index' optionally identifies the failing eigenpair, step or grid entry.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message if index is None else f"{message} (index {index})")
        self.index = index
