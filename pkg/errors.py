"""Exception hierarchy shared by every lab module.

Library code raises these; the experiment layer turns them into the
canonical ``{"success": false, "error": ...}`` envelope.
"""

from __future__ import annotations

from typing import Optional


class LabError(Exception):
    """Base class for all errors raised by the lab."""


class ShapeError(LabError, ValueError):
    """Matrix has the wrong shape (non-square, odd dimension, mismatch)."""


class DomainError(LabError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class ConvergenceError(LabError, ArithmeticError):
    """An iterative solver did not converge."""


class InsufficientSamplesError(LabError, ValueError):
    """Too few Monte Carlo samples for the requested estimate."""


class SelfDualityError(LabError, ValueError):
    """Quaternion matrix is not self-dual within tolerance."""


class ConfigError(LabError, ValueError):
    """Malformed configuration; carries the offending line when known."""

    def __init__(self, message: str, line_number: Optional[int] = None) -> None:
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
