"""Diagnostics and exception types shared by all phases."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    pos: Optional[tuple] = None  # (line, column), 1-based
    phase: str = "parse"  # parse | validate | typecheck | refine

    def __str__(self) -> str:
        where = f"{self.pos[0]}:{self.pos[1]}: " if self.pos else ""
        return f"{where}{self.severity}: {self.message} [{self.phase}]"


class EssenceError(Exception):
    """Base class; carries the diagnostics that caused it."""

    phase = "parse"

    def __init__(self, message: str, pos=None, diagnostics=None):
        super().__init__(message)
        self.pos = pos
        if diagnostics is None:
            diagnostics = [Diagnostic("error", message, pos, self.phase)]
        self.diagnostics = list(diagnostics)

    def __str__(self) -> str:
        return "\n".join(str(d) for d in self.diagnostics)


class LexError(EssenceError):
    phase = "parse"


class ParseError(EssenceError):
    phase = "parse"


class ValidationError(EssenceError):
    phase = "validate"


class TypeCheckError(EssenceError):
    phase = "typecheck"


class RefinementError(EssenceError):
    phase = "refine"


class NoRepresentation(RefinementError):
    pass


class ResourceLimit(RefinementError):
    def __init__(self, message: str, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class DanglingBubble(RefinementError):
    pass


class EvalError(Exception):
    """Undefined operation during evaluation (partial function, empty min, /0)."""


class TooLarge(Exception):
    """Oracle candidate space exceeds the configured cap."""


class DecodeError(Exception):
    """Flat solution violates a representation invariant."""
