"""Recursive-descent parser and canonical printer for pipeline text.

    pipeline  := source { "|" stage } ;
    source    := "commits" "(" string [ "," format ] ")" | "issues" "(" string ")" ;
    stage     := ident [ "(" args ")" ] ;
    arg       := source | expr | ident ":" expr | ident ( "asc" | "desc" ) ;
    orexpr    := andexpr { "||" andexpr } ;
    andexpr   := notexpr { "&&" notexpr } ;
    notexpr   := [ "!" ] cmp ;
    cmp       := term [ cmpop term ] | term "is" "null" ;
    term      := ident | string | integer | float | timestamp | "true" | "false" | "(" expr ")" ;
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Optional, Union

from ..expr import COMPARE_OPS, And, Col, Compare, Expr, IsNull, Lit, Not, Or
from ..ingest import FORMATS, format_timestamp
from ..relmodel import Relation
from .lexer import FLOAT, IDENT, INT, OP, PIPE, PUNCT, STRING, TIMESTAMP, Token, tokenize

STAGES = (
    "filter",
    "select",
    "project",
    "join",
    "sort",
    "count",
    "union",
    "distinct",
    "group_count",
    "frequency_rank",
    "find_max",
    "find_min",
    "top_k",
    "time_window",
    "normalize_identity",
    "link_issues",
    "resolved_filter",
    "case_study",
)
SOURCES = ("commits", "issues")
RESERVED = frozenset({"is", "null", "contains", "matches", "asc", "desc", "true", "false"})


class ParseError(Exception):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


@dataclass(frozen=True)
class CommitsSource:
    path: str
    format: Optional[str] = None


@dataclass(frozen=True)
class IssuesSource:
    path: str


@dataclass(frozen=True)
class InlineSource:
    """An in-memory relation; usable from Python, not expressible in text."""

    relation: Relation


Source = Union[CommitsSource, IssuesSource, InlineSource]


@dataclass(frozen=True)
class Named:
    name: str
    value: Expr


@dataclass(frozen=True)
class SortSpec:
    column: str
    direction: str


Arg = Union[Expr, Named, SortSpec, CommitsSource, IssuesSource]


@dataclass(frozen=True)
class Stage:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Pipeline:
    source: Source
    stages: tuple[Stage, ...] = ()


class _Parser:
    def __init__(self, tokens: list[Token], text_end: tuple[int, int]):
        self.tokens = tokens
        self.pos = 0
        self.end = text_end

    # token helpers
    def peek(self, offset: int = 0) -> Optional[Token]:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok if tok is not None else self.peek()
        if tok is None:
            return ParseError(f"{message}, found end of input", *self.end)
        return ParseError(f"{message}, found {tok.lexeme!r}", tok.line, tok.column)

    def at(self, kind: str, lexeme: Optional[str] = None, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok.kind == kind and (lexeme is None or tok.lexeme == lexeme)

    def expect(self, kind: str, lexeme: Optional[str] = None, what: Optional[str] = None) -> Token:
        if not self.at(kind, lexeme):
            label = what or (repr(lexeme) if lexeme else kind)
            raise self.error(f"expected {label}")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    # grammar
    def pipeline(self) -> Pipeline:
        source = self.source()
        stages = []
        while self.at(PIPE):
            self.pos += 1
            stages.append(self.stage())
        if self.peek() is not None:
            raise self.error("expected '|' or end of input")
        return Pipeline(source, tuple(stages))

    def source(self) -> Source:
        tok = self.peek()
        if tok is None or tok.kind != IDENT or tok.lexeme not in SOURCES:
            raise self.error("expected a source: commits(...) or issues(...)")
        self.pos += 1
        self.expect(PUNCT, "(")
        path = self.expect(STRING, what="a quoted path").value
        if tok.lexeme == "issues":
            self.expect(PUNCT, ")")
            return IssuesSource(path)
        fmt = None
        if self.at(PUNCT, ","):
            self.pos += 1
            ftok = self.expect(IDENT, what=f"a log format ({' or '.join(FORMATS)})")
            if ftok.lexeme not in FORMATS:
                raise self.error(f"expected a log format ({' or '.join(FORMATS)})", ftok)
            fmt = ftok.lexeme
        self.expect(PUNCT, ")")
        return CommitsSource(path, fmt)

    def stage(self) -> Stage:
        tok = self.expect(IDENT, what="a stage name")
        if tok.lexeme not in STAGES:
            raise ParseError(f"unknown stage {tok.lexeme!r}", tok.line, tok.column)
        args: list[Any] = []
        if self.at(PUNCT, "("):
            self.pos += 1
            args.append(self.arg())
            while self.at(PUNCT, ","):
                self.pos += 1
                args.append(self.arg())
            self.expect(PUNCT, ")")
        return Stage(tok.lexeme, tuple(args))

    def arg(self) -> Arg:
        tok = self.peek()
        if tok is not None and tok.kind == IDENT:
            if tok.lexeme in SOURCES and self.at(PUNCT, "(", 1):
                return self.source()
            if self.at(PUNCT, ":", 1):
                self.pos += 2
                return Named(tok.lexeme, self.expr())
            nxt = self.peek(1)
            if nxt is not None and nxt.kind == IDENT and nxt.lexeme in ("asc", "desc"):
                self.check_column(tok)
                self.pos += 2
                return SortSpec(tok.lexeme, nxt.lexeme)
        return self.expr()

    def check_column(self, tok: Token) -> None:
        if tok.lexeme in RESERVED:
            raise ParseError(f"reserved word {tok.lexeme!r} cannot name a column", tok.line, tok.column)

    def expr(self) -> Expr:
        left = self.and_expr()
        while self.at(OP, "||"):
            self.pos += 1
            left = Or(left, self.and_expr())
        return left

    def and_expr(self) -> Expr:
        left = self.not_expr()
        while self.at(OP, "&&"):
            self.pos += 1
            left = And(left, self.not_expr())
        return left

    def not_expr(self) -> Expr:
        if self.at(OP, "!"):
            self.pos += 1
            return Not(self.cmp())
        return self.cmp()

    def _cmp_op(self) -> Optional[str]:
        tok = self.peek()
        if tok is None:
            return None
        if tok.kind == OP and tok.lexeme in COMPARE_OPS:
            return tok.lexeme
        if tok.kind == IDENT and tok.lexeme in ("contains", "matches", "is"):
            return tok.lexeme
        return None

    def cmp(self) -> Expr:
        left = self.term()
        op = self._cmp_op()
        if op is None:
            return left
        self.pos += 1
        if op == "is":
            self.expect(IDENT, "null", what="'null'")
            out: Expr = IsNull(left)
        else:
            out = Compare(op, left, self.term())
        if self._cmp_op() is not None:
            raise self.error("comparisons do not chain; add parentheses")
        return out

    def term(self) -> Expr:
        tok = self.peek()
        if tok is None:
            raise self.error("expected an expression")
        if tok.kind == PUNCT and tok.lexeme == "(":
            self.pos += 1
            inner = self.expr()
            self.expect(PUNCT, ")")
            return inner
        if tok.kind in (STRING, INT, FLOAT, TIMESTAMP):
            self.pos += 1
            return Lit(tok.value)
        if tok.kind == IDENT:
            if tok.lexeme in ("true", "false"):
                self.pos += 1
                return Lit(tok.lexeme == "true")
            self.check_column(tok)
            self.pos += 1
            return Col(tok.lexeme)
        raise self.error("expected an expression")


def _end_position(text: str) -> tuple[int, int]:
    line = text.count("\n") + 1
    return line, len(text) - (text.rfind("\n") + 1) + 1


def parse(tokens_or_text: Union[str, list[Token]]) -> Pipeline:
    """Parse a token list (or raw text) into a :class:`Pipeline`."""
    if isinstance(tokens_or_text, str):
        text = tokens_or_text
        tokens = tokenize(text)
        end = _end_position(text)
    else:
        tokens = list(tokens_or_text)
        last = tokens[-1] if tokens else None
        end = (last.line, last.column + len(last.lexeme)) if last else (1, 1)
    return _Parser(tokens, end).pipeline()


# printing

_OR, _AND, _NOT, _CMP, _TERM = range(1, 6)


def _level(e: Expr) -> int:
    if isinstance(e, Or):
        return _OR
    if isinstance(e, And):
        return _AND
    if isinstance(e, Not):
        return _NOT
    if isinstance(e, (Compare, IsNull)):
        return _CMP
    return _TERM


def quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_literal(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"{value!r} has no literal syntax")
        return repr(value)
    if isinstance(value, str):
        return quote(value)
    if isinstance(value, datetime):
        return "@" + quote(format_timestamp(value))
    raise ValueError(f"{value!r} has no literal syntax")


def format_expr(e: Expr, min_level: int = _OR) -> str:
    if _level(e) < min_level:
        return "(" + format_expr(e) + ")"
    if isinstance(e, Or):
        return f"{format_expr(e.left, _OR)} || {format_expr(e.right, _AND)}"
    if isinstance(e, And):
        return f"{format_expr(e.left, _AND)} && {format_expr(e.right, _NOT)}"
    if isinstance(e, Not):
        return "!" + format_expr(e.operand, _CMP)
    if isinstance(e, Compare):
        return f"{format_expr(e.left, _TERM)} {e.op} {format_expr(e.right, _TERM)}"
    if isinstance(e, IsNull):
        return f"{format_expr(e.operand, _TERM)} is null"
    if isinstance(e, Col):
        return e.name
    if isinstance(e, Lit):
        return format_literal(e.value)
    raise ValueError(f"not an expression: {e!r}")


def _format_source(src: Source) -> str:
    if isinstance(src, CommitsSource):
        fmt = f", {src.format}" if src.format else ""
        return f"commits({quote(src.path)}{fmt})"
    if isinstance(src, IssuesSource):
        return f"issues({quote(src.path)})"
    raise ValueError("inline sources have no text form")


def _format_arg(arg: Arg) -> str:
    if isinstance(arg, (CommitsSource, IssuesSource, InlineSource)):
        return _format_source(arg)
    if isinstance(arg, Named):
        return f"{arg.name}: {format_expr(arg.value)}"
    if isinstance(arg, SortSpec):
        return f"{arg.column} {arg.direction}"
    return format_expr(arg)


def pretty_print(ast: Pipeline) -> str:
    parts = [_format_source(ast.source)]
    for st in ast.stages:
        if st.args:
            parts.append(f"{st.name}({', '.join(_format_arg(a) for a in st.args)})")
        else:
            parts.append(st.name)
    return " | ".join(parts)
