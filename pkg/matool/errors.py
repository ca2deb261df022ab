"""Exception hierarchy shared by every matool module."""

from __future__ import annotations


class MatoolError(Exception):
    """Base class for all toolkit failures."""


class MeshError(MatoolError, ValueError):
    """Invalid mesh parameters or samples that do not fit a mesh."""


class OperatorError(MatoolError, ValueError):
    """Operator applied outside its domain."""


class NonlinearityError(MatoolError, ValueError):
    """Unknown preset, bad parameters, or inconsistent declared limits."""


class BracketError(MatoolError):
    """A root bracket does not straddle a sign change."""

    def __init__(self, message: str, lo: float | None = None, hi: float | None = None,
                 terminal_lo: float | None = None, terminal_hi: float | None = None):
        super().__init__(message)
        self.lo = lo
        self.hi = hi
        self.terminal_lo = terminal_lo
        self.terminal_hi = terminal_hi


class ConvergenceError(MatoolError):
    """An iterative solver stopped before reaching its tolerance."""


class EigenError(MatoolError):
    """Non-principal eigenfunction or disagreement between eigen methods."""


class BranchError(MatoolError):
    """A branch is too sparse or a query falls outside its swept range."""


class ConfigError(MatoolError, ValueError):
    """Malformed or invalid run configuration."""
