"""Validation errors and column checks shared by the loaders."""
from __future__ import annotations

from typing import Iterable, Sequence


class ValidationError(RuntimeError):
    """Raised when an input file or config fails validation."""


class SchemaError(ValidationError):
    """Raised when a tabular input is missing required columns."""

    def __init__(self, missing: Sequence[str], source: str | None = None) -> None:
        self.missing = list(missing)
        self.source = source
        where = f" in {source}" if source else ""
        super().__init__(f"Missing required column(s){where}: {', '.join(self.missing)}")


class RowValidationError(ValidationError):
    """Raised when a single data row violates a type invariant."""

    def __init__(self, row: int, message: str, source: str | None = None) -> None:
        self.row = row
        self.source = source
        where = f"{source}: " if source else ""
        super().__init__(f"{where}row {row}: {message}")


class ConfigError(ValidationError):
    """Raised when configuration values are invalid."""


def require_columns(columns: Iterable[str], required: Iterable[str], *, source: str | None = None) -> None:
    present = set(columns)
    missing = [name for name in required if name not in present]
    if missing:
        raise SchemaError(missing, source)


def parse_bool(value: object, *, row: int, field: str, source: str | None = None) -> bool:
    text = str(value).strip().lower()
    if text in {"true", "1", "yes", "y", "t"}:
        return True
    if text in {"false", "0", "no", "n", "f"}:
        return False
    raise RowValidationError(row, f"'{field}' must be true/false, got {value!r}", source)


def parse_optional_int(value: object, *, row: int, field: str, source: str | None = None) -> int | None:
    text = str(value).strip()
    if not text or text == "-":
        return None
    try:
        number = float(text)
    except ValueError as exc:
        raise RowValidationError(row, f"'{field}' must be an integer, got {value!r}", source) from exc
    if not number.is_integer():
        raise RowValidationError(row, f"'{field}' must be an integer, got {value!r}", source)
    return int(number)


__all__ = [
    "ValidationError",
    "SchemaError",
    "RowValidationError",
    "ConfigError",
    "require_columns",
    "parse_bool",
    "parse_optional_int",
]
