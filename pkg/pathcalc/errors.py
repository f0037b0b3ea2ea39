"""Error kinds raised by pathcalc.

Every error derives from ``ValueError`` so callers validating input with the
usual ``except ValueError`` keep working.
"""

from typing import Optional


class PathcalcError(ValueError):
    """Base class for all pathcalc validation errors."""


class InvalidArgument(PathcalcError):
    """An argument is outside its documented domain."""


class AccessibilityViolation(PathcalcError):
    """A jump lies off the partition grid it must be accessible from."""


class DegeneratePath(PathcalcError):
    """A path has no oscillation where the computation needs some."""


class DegenerateProduct(PathcalcError):
    """A product factor 1 + jump is exactly zero."""


class NotAnEvolution(PathcalcError):
    """A distribution path does not start at 1 or touches 0."""


class InvalidSpec(PathcalcError):
    """A generator specification violates its invariants."""


class InvalidPrice(PathcalcError):
    """A price path is not admissible for hedging."""


class NumericError(PathcalcError):
    """A numerical factorization or evaluation failed."""


class MalformedCsv(PathcalcError):
    """A CSV input could not be parsed into a path."""

    def __init__(self, detail: str, row: Optional[int] = None, field: Optional[str] = None):
        self.detail = detail
        self.row = row
        self.field = field
        where = []
        if row is not None:
            where.append(f"row {row}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{detail}")
