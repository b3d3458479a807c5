"""Exception hierarchy shared by all ssdiag modules."""

from __future__ import annotations


class SsdiagError(Exception):
    """Base class for every error raised by this package."""


class ParseError(SsdiagError, ValueError):
    """Malformed input text. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(SsdiagError, ValueError):
    pass


class AssignmentError(SsdiagError):
    """Conflicting assert, retract of something never asserted, or a read of an unassigned variable."""


class CycleError(SsdiagError):
    pass


class NotDecomposableError(SsdiagError):
    pass


class CapExceededError(SsdiagError):
    """An enumeration would exceed the configured size cap."""

    def __init__(self, what: str, size: int, cap: int):
        self.size = size
        self.cap = cap
        super().__init__(f"{what}: {size} exceeds cap {cap}")


class ExtractionError(SsdiagError):
    """An extraction invariant failed; indicates a bug or a non-decomposable input."""
