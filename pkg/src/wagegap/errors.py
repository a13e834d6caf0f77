"""Exception hierarchy.

Validation errors describe bad input or configuration (CLI exit code 2);
compute errors describe inputs that are well formed but on which a
quantity is undefined (CLI exit code 1).
"""

from __future__ import annotations


class WagegapError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ValidationError(WagegapError, ValueError):
    exit_code = 2


class SchemaError(ValidationError):
    """Input columns do not match the declared schema."""


class ParseError(ValidationError):
    """A cell could not be parsed; carries the 1-based data row and column."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class ConfigError(ValidationError):
    """The analysis config document is malformed."""


class ComputeError(WagegapError, ArithmeticError):
    exit_code = 1


class DomainError(ComputeError):
    """Argument outside the domain of the requested quantity."""


class RankDeficiencyError(ComputeError):
    def __init__(self, message: str, columns: list[str] | None = None):
        super().__init__(message)
        self.columns = list(columns or [])


class InsufficientDataError(ComputeError):
    """Too few observations for the requested fit."""


class EmptyGroupError(ComputeError):
    def __init__(self, message: str, group: str | None = None):
        super().__init__(message)
        self.group = group


class ColumnMismatchError(ComputeError):
    """Two sets of group statistics do not share the same design columns."""
