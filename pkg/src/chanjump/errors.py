"""Exception hierarchy.

ValidationError covers malformed inputs (model files, unknown record names,
dimension mismatches).  NumericalError covers conditions detected during
computation (non-ergodic generators, eigensolver failures, overflow).  The
CLI maps them to exit codes 1 and 2 respectively.
"""

from __future__ import annotations


class ChanjumpError(Exception):
    """Base class for all library errors."""


class ValidationError(ChanjumpError):
    """Input data violates a documented invariant or schema."""


class NumericalError(ChanjumpError):
    """A numerical procedure failed or its preconditions do not hold."""


class NonErgodicError(NumericalError):
    """The generator has a degenerate null space (no unique stationary state).

    Carries the measured null-space dimension so callers can decide whether
    to proceed per connected component.
    """

    def __init__(self, message: str, null_dim: int):
        super().__init__(message)
        self.null_dim = null_dim
