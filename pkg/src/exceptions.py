"""Exception hierarchy for the CSPC market simulator."""
from typing import Optional

from pydantic import ValidationError


class CspcError(Exception):
    """Base class for all simulator errors."""


class DomainError(CspcError, ValueError):
    """An operation was called outside its domain (negative load, zero price, ...)."""


class SolverRefusalError(DomainError):
    """The brute-force oracle refuses problems it cannot enumerate."""


class ConfigError(CspcError):
    """A scenario configuration could not be parsed or validated."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        field: Optional[str] = None,
        line: Optional[int] = None
    ):
        self.path = path
        self.field = field
        self.line = line
        location = []
        if path:
            location.append(str(path))
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(field)
        prefix = f"{' / '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")

    @classmethod
    def from_validation(cls, error: ValidationError, path: Optional[str] = None) -> "ConfigError":
        """Report the first pydantic error with its dotted field path."""
        first = error.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or None
        extra = error.error_count() - 1
        message = first["msg"] + (f" (and {extra} more)" if extra else "")
        return cls(message, path=path, field=field)


class ExportError(CspcError, OSError):
    """Writing a run artifact failed."""

    def __init__(self, message: str, path: Optional[str] = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
