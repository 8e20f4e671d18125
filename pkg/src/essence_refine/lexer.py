"""Tokenizer for the modelling language."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import LexError

KEYWORDS = frozenset("""
given letting be domain find such that maximising minimising int bool set mset
function relation tuple matrix indexed by of size maxsize total partial injective
surjective forall exists sum elem union intersect subset subseteq supset supseteq
not true false alldiff min max card defined range _
""".split())

# longest first
OPERATORS = [
    "<=>", "<->", "-->", "/\\", "\\/", "=>", "->", "..", "!=", "<=", ">=",
    "+", "-", "*", "/", "%", "=", "<", ">", "(", ")", "[", "]", "{", "}",
    ",", ":", ".", ";", "@", "|",
]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_INT = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | ident | int | op | eof
    text: str
    line: int
    col: int

    @property
    def pos(self) -> tuple:
        return (self.line, self.col)


def tokenize(source: str) -> list:
    """Split ``source`` into tokens; ``$`` starts a comment running to end of line."""
    tokens = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line, col = line + 1, 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "$":
            while i < n and source[i] != "\n":
                i += 1
            continue
        m = _IDENT.match(source, i)
        if m:
            text = m.group()
            kind = "keyword" if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, line, col))
        else:
            m = _INT.match(source, i)
            if m:
                tokens.append(Token("int", m.group(), line, col))
            else:
                for op in OPERATORS:
                    if source.startswith(op, i):
                        tokens.append(Token("op", op, line, col))
                        break
                else:
                    raise LexError(f"unexpected character {ch!r}", (line, col))
                i += len(op)
                col += len(op)
                continue
        i = m.end()
        col += len(m.group())
    return tokens
