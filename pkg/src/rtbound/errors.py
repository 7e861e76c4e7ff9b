"""Exception hierarchy shared by every module."""

from __future__ import annotations


class RecError(Exception):
    """Base class for all errors raised by rtbound."""


class RecSyntaxError(RecError):
    """Input text does not follow the recurrence file format."""

    def __init__(self, message: str, line: int, column: int, expected: str | None = None):
        self.line = line
        self.column = column
        self.expected = expected
        where = f"line {line}, column {column}"
        detail = f"{message} at {where}"
        if expected:
            detail += f" (expected {expected})"
        super().__init__(detail)


class ValidationError(RecError):
    """Input parses but violates a semantic rule of the grammar."""


class StructureError(RecError):
    """An intermediate object lost a shape property the analysis depends on."""


class ResourceError(RecError):
    """A configured size cap was exceeded."""
