"""
Exception hierarchy shared by the services and the command line.

Every error carries the process exit code the CLI returns for it and a short
machine-readable code used in structured error messages.
"""

from __future__ import annotations

from typing import Any, Optional


class LinearizationError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code: int = 2
    code: str = "error"

    def __init__(self, message: str, *, detail: Optional[dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.detail = detail or {}


class InputError(LinearizationError):
    """Malformed literal or document, or inconsistent dimensions."""

    exit_code = 2
    code = "input"


class PreconditionError(InputError):
    """An operation was called outside its documented domain."""

    code = "precondition"


class FieldError(PreconditionError):
    """The field cannot host the requested value or operation."""

    code = "field"


class SingularMatrixError(PreconditionError):
    code = "singular"


class NotRegularError(PreconditionError):
    code = "not-regular"


class DivisionError(PreconditionError):
    """Raised when a bivariate numerator does not vanish on the diagonal."""

    code = "division"


class IncompatibleMultipliersError(PreconditionError):
    code = "incompatible-multipliers"


class RejectionError(LinearizationError):
    """A well-posed question whose mathematical answer is negative."""

    exit_code = 1
    code = "rejected"


class EigensolverError(LinearizationError):
    exit_code = 3
    code = "eigensolver"


class TheoremViolation(LinearizationError):
    """An identity that must hold did not; points at an implementation bug."""

    exit_code = 3
    code = "theorem-violation"
