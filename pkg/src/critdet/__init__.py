"""Validated numerics for the critical determinant of |x|^p + |y|^p < 1."""

from .errors import (
    ConvergenceError,
    CritdetError,
    DegenerateBox,
    DomainError,
    EnclosureError,
    IntervalOverflow,
    SingularityError,
)
from .interval import EMPTY, Box, Interval, bisect, eval_monotone, eval_rational, intersect

__version__ = "0.1.0"

__all__ = [
    "Box",
    "ConvergenceError",
    "CritdetError",
    "DegenerateBox",
    "DomainError",
    "EMPTY",
    "EnclosureError",
    "Interval",
    "IntervalOverflow",
    "SingularityError",
    "bisect",
    "eval_monotone",
    "eval_rational",
    "intersect",
    "__version__",
]
