"""Exception types raised across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the region where a formula is defined."""


class QuadratureError(RuntimeError):
    """An integral failed to converge; the message names the integral."""


class DegenerateSystemError(RuntimeError):
    """A linear system is singular or too ill-conditioned to trust.

    The offending matrix is kept on ``self.matrix`` for diagnostics.
    """

    def __init__(self, message: str, matrix=None, condition_estimate: float | None = None):
        super().__init__(message)
        self.matrix = matrix
        self.condition_estimate = condition_estimate
