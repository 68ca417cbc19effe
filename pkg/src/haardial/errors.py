"""Exception types shared by every module."""


class HaarDialError(Exception):
    """Base class for all errors raised by haardial."""


class ShapeError(HaarDialError, ValueError):
    """Operand dimensions are incompatible."""


class DomainError(HaarDialError, ValueError):
    """A parameter lies outside its allowed range."""


class DegenerateInputError(HaarDialError, ValueError):
    """Input sits on a measure-zero degenerate set (zero pivot, rank deficiency)."""


class ValidationError(HaarDialError, ValueError):
    """A circuit or configuration violates its invariants."""
