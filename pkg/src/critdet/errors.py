"""Exception hierarchy shared by every module of the package."""


class CritdetError(Exception):
    """Base class for all package errors."""


class DomainError(CritdetError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class SingularityError(DomainError):
    """A derivative enclosure blew up (zero base with negative power, vanishing denominator)."""


class DegenerateBox(CritdetError, ValueError):
    """A point box cannot be bisected."""


class IntervalOverflow(CritdetError, ArithmeticError):
    """An interval endpoint overflowed to infinity."""


class EnclosureError(CritdetError, ArithmeticError):
    """An enclosure became empty after intersection with a known bound."""


class ConvergenceError(CritdetError, RuntimeError):
    """An iteration failed to reach its tolerance within the iteration cap."""
