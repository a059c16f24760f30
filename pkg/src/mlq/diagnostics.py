"""Diagnostic records shared by the lexer, parser, and validator.

Codes form a closed, documented set; tools and tests key on them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Severity(enum.Enum):
    ERROR = "ERROR"
    WARNING = "WARNING"

    def __str__(self) -> str:
        return self.value


#: The closed set of diagnostic codes.
CODES = {
    "LEX001": "unknown character",
    "LEX002": "unterminated string literal",
    "SYN001": "unexpected token",
    "SYN002": "premature end of input",
    "VAL001": "unresolved reference",
    "VAL002": "duplicate name",
    "VAL003": "type mismatch",
    "VAL004": "send arity or argument type mismatch",
    "VAL005": "unreachable state",
    "VAL006": "port incompatibility in connector",
    "VAL007": "dataset column missing or dataset unreadable",
    "VAL008": "guard is not boolean",
    "VAL009": "data-analytics argument arity mismatch",
    "VAL010": "zero timer delay or zero neighbor count",
}


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    line: int
    col: int

    def __post_init__(self):
        assert self.code in CODES, f"unknown diagnostic code {self.code}"

    def render(self) -> str:
        """Normative line format consumed by the CLI and the HTTP service."""
        return f"{self.severity} {self.code} {self.line}:{self.col} {self.message}"


def error(code: str, message: str, line: int, col: int) -> Diagnostic:
    return Diagnostic(Severity.ERROR, code, message, line, col)


def warning(code: str, message: str, line: int, col: int) -> Diagnostic:
    return Diagnostic(Severity.WARNING, code, message, line, col)
