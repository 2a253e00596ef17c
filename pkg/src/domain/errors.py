from __future__ import annotations


class SphereKernelError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SphereKernelError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class GroupMismatchError(DomainError):
    """A group element does not belong to the model it is used with."""


class OffGridError(DomainError):
    """A sampled coefficient profile was asked for an element it does not hold."""


class SpecError(DomainError):
    """A kernel-spec document or tree is malformed. `path` locates the offending node."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.detail = message


class ConvergenceError(SphereKernelError, ArithmeticError):
    """An iterative numerical procedure did not reach its tolerance."""


class FactorizationError(ConvergenceError):
    """Raised when a covariance matrix cannot be factorised even after jitter escalation."""
