"""Exception types shared across the package."""

from __future__ import annotations


class SymsosError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(SymsosError, ValueError):
    """Operands live over different numbers of variables."""


class InvalidDomain(SymsosError, ValueError):
    """A finite-domain description is malformed (duplicate roots, odd count, ...)."""


class InvalidSystem(SymsosError, ValueError):
    """A constraint system violates a structural precondition (invariance, closure)."""


class InvalidInstance(SymsosError, ValueError):
    """A problem instance is malformed for the requested pipeline."""


class InvalidWitness(SymsosError, ValueError):
    """A certificate handed in as a building block does not verify."""


class ReconstructionError(SymsosError, ValueError):
    """The reduced identity does not close; carries the exact residual."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class ResourceLimit(SymsosError, RuntimeError):
    """A configured size or iteration cap would be exceeded."""


class ParseError(SymsosError, ValueError):
    """A problem or certificate file is syntactically invalid."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column
