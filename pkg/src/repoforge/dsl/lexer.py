from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

from ..ingest import parse_timestamp
from ..relmodel import INT_MAX, INT_MIN

IDENT = "ident"
INT = "integer"
FLOAT = "float"
STRING = "string"
TIMESTAMP = "timestamp"
PUNCT = "punct"
OP = "operator"
PIPE = "pipe"


class LexError(Exception):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    line: int
    column: int
    value: Any = None

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.lexeme!r}, {self.line}:{self.column})"


_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"-?[0-9]+(?:\.[0-9]+(?:[eE][+-]?[0-9]+)?|[eE][+-]?[0-9]+)?")
# longest first
_OPERATORS = ("==", "!=", "<=", ">=", "&&", "||", "<", ">", "!")
_PUNCT = "(),:"


def _read_string(text: str, start: int, line: int, col: int) -> tuple[str, int]:
    """Decode the string literal opening at ``text[start]``; return (value, end offset)."""
    out = []
    i = start + 1
    while i < len(text):
        ch = text[i]
        if ch == '"':
            return "".join(out), i + 1
        if ch == "\\":
            nxt = text[i + 1 : i + 2]
            if nxt not in ('"', "\\"):
                bl, bc = _position(text, i, line, col, start)
                raise LexError(f"unsupported escape sequence \\{nxt}", bl, bc)
            out.append(nxt)
            i += 2
            continue
        out.append(ch)
        i += 1
    raise LexError("unterminated string literal", line, col)


def _position(text: str, offset: int, line: int, col: int, origin: int) -> tuple[int, int]:
    """Line/column of ``offset`` given that ``origin`` sits at (line, col)."""
    chunk = text[origin:offset]
    newlines = chunk.count("\n")
    if not newlines:
        return line, col + len(chunk)
    return line + newlines, len(chunk) - chunk.rfind("\n")


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def advance(to: int) -> None:
        nonlocal i, line, col
        line, col = _position(text, to, line, col, i)
        i = to

    while i < n:
        ch = text[i]
        if ch == "\n" or ch.isspace():
            advance(i + 1)
            continue
        if ch == "#":
            end = text.find("\n", i)
            advance(n if end < 0 else end)
            continue
        if ch == '"':
            value, end = _read_string(text, i, line, col)
            tokens.append(Token(STRING, text[i:end], line, col, value))
            advance(end)
            continue
        if ch == "@":
            if text[i + 1 : i + 2] != '"':
                raise LexError("'@' must be followed by a quoted timestamp", line, col)
            raw, end = _read_string(text, i + 1, line, col + 1)
            try:
                ts = parse_timestamp(raw)
            except ValueError as exc:
                raise LexError(f"invalid timestamp literal: {exc}", line, col) from None
            tokens.append(Token(TIMESTAMP, text[i:end], line, col, ts))
            advance(end)
            continue
        m = _NUMBER_RE.match(text, i)
        if m and (ch.isdigit() or ch == "-"):
            lexeme = m.group()
            if "." in lexeme or "e" in lexeme or "E" in lexeme:
                tokens.append(Token(FLOAT, lexeme, line, col, float(lexeme)))
            else:
                value = int(lexeme)
                if not INT_MIN <= value <= INT_MAX:
                    raise LexError(f"integer literal {lexeme} outside the 64-bit range", line, col)
                tokens.append(Token(INT, lexeme, line, col, value))
            advance(m.end())
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            tokens.append(Token(IDENT, m.group(), line, col, m.group()))
            advance(m.end())
            continue
        op = next((o for o in _OPERATORS if text.startswith(o, i)), None)
        if op:
            tokens.append(Token(OP, op, line, col, op))
            advance(i + len(op))
            continue
        if ch == "|":
            tokens.append(Token(PIPE, ch, line, col, ch))
            advance(i + 1)
            continue
        if ch in _PUNCT:
            tokens.append(Token(PUNCT, ch, line, col, ch))
            advance(i + 1)
            continue
        raise LexError(f"illegal character {ch!r}", line, col)
    return tokens
