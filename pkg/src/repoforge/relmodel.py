"""Typed in-memory relations.

Cells are plain Python values: ``None``, ``bool``, ``int``, ``float``, ``str``
and timezone-aware UTC ``datetime``. A relation is immutable, ordered, and
keeps duplicates (bag semantics).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Any, Iterable, Optional, Sequence

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

_ILLEGAL_NAME_CHARS = set("|,()")


class SchemaError(Exception):
    """Raised for malformed schemas and unresolvable column references."""


class BaseType(enum.Enum):
    BOOL = "Bool"
    INT = "Int"
    FLOAT = "Float"
    TEXT = "Text"
    TIMESTAMP = "Timestamp"

    def __str__(self) -> str:
        return self.value


ORDERED_TYPES = frozenset({BaseType.INT, BaseType.FLOAT, BaseType.TEXT, BaseType.TIMESTAMP})
NUMERIC_TYPES = frozenset({BaseType.INT, BaseType.FLOAT})


@dataclass(frozen=True)
class ColumnType:
    base: BaseType
    nullable: bool = False

    def __str__(self) -> str:
        return f"{self.base}{'?' if self.nullable else ''}"


@dataclass(frozen=True)
class Column:
    name: str
    type: ColumnType


def _check_name(name: Any) -> None:
    if not isinstance(name, str) or not name:
        raise SchemaError(f"column name must be a non-empty string, got {name!r}")
    if any(ch.isspace() or ch in _ILLEGAL_NAME_CHARS for ch in name):
        raise SchemaError(f"illegal character in column name {name!r}")


@dataclass(frozen=True)
class Schema:
    columns: tuple[Column, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "columns", tuple(self.columns))
        seen: set[str] = set()
        for col in self.columns:
            _check_name(col.name)
            if col.name in seen:
                raise SchemaError(f"duplicate column name {col.name!r}")
            seen.add(col.name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def __len__(self) -> int:
        return len(self.columns)

    def __contains__(self, name: object) -> bool:
        return any(c.name == name for c in self.columns)

    def index(self, name: str) -> int:
        for i, col in enumerate(self.columns):
            if col.name == name:
                return i
        raise SchemaError(f"unknown column {name!r}; schema has {list(self.names)}")

    def column(self, name: str) -> Column:
        return self.columns[self.index(name)]

    def type_of(self, name: str) -> ColumnType:
        return self.column(name).type

    def __str__(self) -> str:
        return "{" + ", ".join(f"{c.name}:{c.type}" for c in self.columns) + "}"


def schema(*spec: tuple) -> Schema:
    """Shorthand: ``schema(("a", BaseType.INT), ("b", BaseType.TEXT, True))``."""
    cols = []
    for item in spec:
        name, base, *rest = item
        nullable = bool(rest[0]) if rest else False
        cols.append(Column(name, ColumnType(base, nullable)))
    return Schema(tuple(cols))


def base_type_of(value: Any) -> Optional[BaseType]:
    """Base type of a non-null Python value, or None if it is not a valid cell."""
    # bool before int: bool is an int subclass
    if isinstance(value, bool):
        return BaseType.BOOL
    if isinstance(value, int):
        return BaseType.INT
    if isinstance(value, float):
        return BaseType.FLOAT
    if isinstance(value, str):
        return BaseType.TEXT
    if isinstance(value, datetime):
        return BaseType.TIMESTAMP
    return None


def is_utc(ts: datetime) -> bool:
    return ts.tzinfo is not None and ts.utcoffset() == timedelta(0)


def _cell_violation(col: Column, value: Any) -> Optional[str]:
    if value is None:
        if col.type.nullable:
            return None
        return f"column {col.name!r} is not nullable but got Null"
    actual = base_type_of(value)
    if actual is not col.type.base:
        got = actual.value if actual else type(value).__name__
        return f"column {col.name!r} expects {col.type.base} but got {got} {value!r}"
    if actual is BaseType.INT and not INT_MIN <= value <= INT_MAX:
        return f"column {col.name!r}: integer {value} outside the 64-bit range"
    if actual is BaseType.TIMESTAMP and not is_utc(value):
        return f"column {col.name!r}: timestamp {value!r} is not UTC"
    return None


def validate_record(schema: Schema, record: Sequence[Any]) -> Optional[str]:
    """Return None if ``record`` fits ``schema``, else a description of the first violation."""
    if len(record) != len(schema):
        return f"arity {len(record)} != {len(schema)}"
    for col, value in zip(schema.columns, record):
        problem = _cell_violation(col, value)
        if problem:
            return problem
    return None


@dataclass(frozen=True)
class Relation:
    """An ordered bag of rows conforming to ``schema``.

    Build through :func:`make_relation`; the constructor itself does not validate.
    """

    schema: Schema
    rows: tuple[tuple[Any, ...], ...] = ()

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def names(self) -> tuple[str, ...]:
        return self.schema.names

    def column_values(self, name: str) -> list[Any]:
        i = self.schema.index(name)
        return [row[i] for row in self.rows]

    def to_dicts(self) -> list[dict[str, Any]]:
        names = self.names
        return [dict(zip(names, row)) for row in self.rows]


def make_relation(schema: Schema, rows: Iterable[Sequence[Any]] = ()) -> Relation:
    """Validate every row against ``schema`` and build a relation, preserving order.

    Raises TypeError for arity/type mismatches and ValueError for NaN floats.
    """
    if not isinstance(schema, Schema):
        raise SchemaError(f"expected a Schema, got {type(schema).__name__}")
    out = []
    width = len(schema)
    for i, row in enumerate(rows):
        row = tuple(row)
        if len(row) != width:
            raise TypeError(f"row {i}: arity {len(row)} != {width}")
        for col, value in zip(schema.columns, row):
            if isinstance(value, float) and math.isnan(value):
                raise ValueError(f"row {i}, column {col.name!r}: NaN is not allowed")
            problem = _cell_violation(col, value)
            if problem:
                raise TypeError(f"row {i}: {problem}")
        out.append(row)
    return Relation(schema, tuple(out))


def empty(schema: Schema) -> Relation:
    return Relation(schema, ())


def values_equal(a: Any, b: Any) -> bool:
    """Structural cell equality: no Int/Float/Bool coercion, Null equals only Null."""
    if a is None or b is None:
        return a is None and b is None
    return base_type_of(a) is base_type_of(b) and a == b
