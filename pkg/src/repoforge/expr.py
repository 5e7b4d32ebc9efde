"""Predicate expressions over relation columns.

Evaluation is two-valued: any comparison touching a Null operand is false, and
only ``IsNull`` observes Nulls directly.
"""
from __future__ import annotations

import operator
import re
from dataclasses import dataclass
from typing import Any, Callable, Union

from .relmodel import ORDERED_TYPES, BaseType, Schema, SchemaError, base_type_of


class PredicateError(Exception):
    pass


@dataclass(frozen=True)
class Col:
    name: str


@dataclass(frozen=True)
class Lit:
    value: Any

    def __eq__(self, other: object) -> bool:
        # 1 == 1.0 == True in Python; literals must not conflate them
        if not isinstance(other, Lit):
            return NotImplemented
        return base_type_of(self.value) is base_type_of(other.value) and self.value == other.value

    def __hash__(self) -> int:
        return hash((base_type_of(self.value), self.value))


@dataclass(frozen=True)
class Compare:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class IsNull:
    operand: "Expr"


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Or:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Not:
    operand: "Expr"


Expr = Union[Col, Lit, Compare, IsNull, And, Or, Not]

ORDER_OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}
EQ_OPS = {"==": operator.eq, "!=": operator.ne}
TEXT_OPS = ("contains", "matches")
COMPARE_OPS = tuple(EQ_OPS) + tuple(ORDER_OPS) + TEXT_OPS


def conjoin(*preds: Expr) -> Expr:
    out = preds[0]
    for p in preds[1:]:
        out = And(out, p)
    return out


def type_of(expr: Expr, schema: Schema) -> BaseType:
    """Type-check ``expr`` against ``schema`` and return its base type."""
    if isinstance(expr, Col):
        try:
            return schema.type_of(expr.name).base
        except SchemaError as exc:
            raise PredicateError(str(exc)) from None
    if isinstance(expr, Lit):
        t = base_type_of(expr.value)
        if t is None:
            raise PredicateError(f"unsupported literal {expr.value!r}")
        return t
    if isinstance(expr, Compare):
        lt, rt = type_of(expr.left, schema), type_of(expr.right, schema)
        if expr.op not in COMPARE_OPS:
            raise PredicateError(f"unknown comparison operator {expr.op!r}")
        if lt is not rt:
            raise PredicateError(f"cannot compare {lt} with {rt} using {expr.op!r}")
        if expr.op in ORDER_OPS and lt not in ORDERED_TYPES:
            raise PredicateError(f"{lt} values are not ordered")
        if expr.op in TEXT_OPS and lt is not BaseType.TEXT:
            raise PredicateError(f"{expr.op!r} requires Text operands, got {lt}")
        if expr.op == "matches" and isinstance(expr.right, Lit):
            _compile_regex(expr.right.value)
        return BaseType.BOOL
    if isinstance(expr, IsNull):
        type_of(expr.operand, schema)
        return BaseType.BOOL
    if isinstance(expr, (And, Or)):
        for side in (expr.left, expr.right):
            _require_bool(side, schema)
        return BaseType.BOOL
    if isinstance(expr, Not):
        _require_bool(expr.operand, schema)
        return BaseType.BOOL
    raise PredicateError(f"not an expression: {expr!r}")


def _require_bool(expr: Expr, schema: Schema) -> None:
    t = type_of(expr, schema)
    if t is not BaseType.BOOL:
        raise PredicateError(f"expected a Bool operand, got {t}")


def _compile_regex(pattern: str) -> re.Pattern:
    try:
        return re.compile(pattern)
    except re.error as exc:
        raise PredicateError(f"invalid regex {pattern!r}: {exc}") from None


def compile_predicate(expr: Expr, schema: Schema) -> Callable[[tuple], bool]:
    """Type-check and compile ``expr`` into a row -> bool function."""
    if type_of(expr, schema) is not BaseType.BOOL:
        raise PredicateError("predicate must evaluate to Bool")
    fn = _compile(expr, schema)
    return lambda row: fn(row) is True


def _compile(expr: Expr, schema: Schema) -> Callable[[tuple], Any]:
    if isinstance(expr, Col):
        i = schema.index(expr.name)
        return lambda row: row[i]
    if isinstance(expr, Lit):
        v = expr.value
        return lambda row: v
    if isinstance(expr, IsNull):
        inner = _compile(expr.operand, schema)
        return lambda row: inner(row) is None
    if isinstance(expr, And):
        a, b = _compile(expr.left, schema), _compile(expr.right, schema)
        return lambda row: a(row) is True and b(row) is True
    if isinstance(expr, Or):
        a, b = _compile(expr.left, schema), _compile(expr.right, schema)
        return lambda row: a(row) is True or b(row) is True
    if isinstance(expr, Not):
        a = _compile(expr.operand, schema)
        return lambda row: a(row) is not True
    if isinstance(expr, Compare):
        return _compile_compare(expr, schema)
    raise PredicateError(f"not an expression: {expr!r}")


def _compile_compare(expr: Compare, schema: Schema) -> Callable[[tuple], bool]:
    left, right = _compile(expr.left, schema), _compile(expr.right, schema)
    if expr.op == "contains":
        test = lambda a, b: b in a
    elif expr.op == "matches":
        if isinstance(expr.right, Lit):
            rx = _compile_regex(expr.right.value)
            test = lambda a, b: rx.search(a) is not None
        else:
            test = lambda a, b: _compile_regex(b).search(a) is not None
    else:
        test = EQ_OPS.get(expr.op) or ORDER_OPS[expr.op]

    def run(row: tuple) -> bool:
        a, b = left(row), right(row)
        if a is None or b is None:
            return False
        return bool(test(a, b))

    return run
