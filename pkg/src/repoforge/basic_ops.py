"""Relational-algebra operators: the bottom layer of the operator stack.

Every operator is a pure function ``Relation(s) -> Relation`` (``count`` returns
an int). Output row order is always defined, so results compare exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Sequence

from .expr import Expr, compile_predicate
from .relmodel import (
    NUMERIC_TYPES,
    ORDERED_TYPES,
    BaseType,
    Column,
    ColumnType,
    Relation,
    Schema,
    SchemaError,
    make_relation,
)

ASC = "asc"
DESC = "desc"
RIGHT_SUFFIX = "_r"


@dataclass(frozen=True)
class SortKey:
    column: str
    direction: str = ASC

    def __post_init__(self) -> None:
        if self.direction not in (ASC, DESC):
            raise ValueError(f"sort direction must be 'asc' or 'desc', got {self.direction!r}")


@dataclass(frozen=True)
class Aggregate:
    kind: str
    column: Optional[str] = None
    output: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ("count", "sum", "min", "max", "avg"):
            raise ValueError(f"unknown aggregate {self.kind!r}")
        if self.kind == "count" and self.column is not None:
            raise ValueError("count takes no input column")
        if self.kind != "count" and self.column is None:
            raise ValueError(f"{self.kind} needs an input column")
        if not self.output:
            name = self.kind if self.column is None else f"{self.kind}_{self.column}"
            object.__setattr__(self, "output", name)


def filter(rel: Relation, p: Expr) -> Relation:  # noqa: A001 - operator name
    test = compile_predicate(p, rel.schema)
    return Relation(rel.schema, tuple(row for row in rel.rows if test(row)))


def project(rel: Relation, columns: Sequence[str]) -> Relation:
    columns = list(columns)
    if len(set(columns)) != len(columns):
        raise SchemaError(f"duplicate column in projection {columns}")
    idx = [rel.schema.index(c) for c in columns]
    out_schema = Schema(tuple(rel.schema.columns[i] for i in idx))
    return Relation(out_schema, tuple(tuple(row[i] for i in idx) for row in rel.rows))


select = project


def _combined_schema(left: Schema, right: Schema) -> Schema:
    cols = list(left.columns)
    taken = set(left.names) | set(right.names)
    for col in right.columns:
        name = col.name
        if name in left:
            name += RIGHT_SUFFIX
            while name in taken:
                name += RIGHT_SUFFIX
            taken.add(name)
        cols.append(Column(name, col.type))
    return Schema(tuple(cols))


def join(
    left: Relation,
    right: Relation,
    on: Sequence[tuple[str, str]] = (),
    kind: str = "inner",
) -> Relation:
    """Inner equi-join or cross product.

    Output columns are left then right, with clashing right names suffixed
    ``_r``. Rows come out in (left index, right index) order. Null keys never match.
    """
    on = list(on)
    if kind == "cross":
        if on:
            raise SchemaError("a cross join takes no key columns")
    elif kind == "inner":
        if not on:
            raise SchemaError("an inner join needs at least one key pair")
    else:
        raise SchemaError(f"unknown join kind {kind!r}")

    out_schema = _combined_schema(left.schema, right.schema)
    if kind == "cross":
        rows = tuple(l + r for l in left.rows for r in right.rows)
        return Relation(out_schema, rows)

    li, ri = [], []
    for lc, rc in on:
        lt, rt = left.schema.type_of(lc), right.schema.type_of(rc)
        if lt.base is not rt.base:
            raise SchemaError(f"join key type mismatch: {lc}:{lt.base} vs {rc}:{rt.base}")
        li.append(left.schema.index(lc))
        ri.append(right.schema.index(rc))

    # key types already agree per pair, so Python equality is structural equality here
    buckets: dict[tuple, list[tuple]] = {}
    for r in right.rows:
        key = tuple(r[i] for i in ri)
        if None in key:
            continue
        buckets.setdefault(key, []).append(r)
    rows = []
    for l in left.rows:
        key = tuple(l[i] for i in li)
        if None in key:
            continue
        for r in buckets.get(key, ()):
            rows.append(l + r)
    return Relation(out_schema, tuple(rows))


def cross(left: Relation, right: Relation) -> Relation:
    return join(left, right, (), "cross")


def sort_key_fn(i: int):
    # Null sorts before every value
    return lambda row: (0,) if row[i] is None else (1, row[i])


def sort(rel: Relation, keys: Sequence[SortKey]) -> Relation:
    """Stable multi-key sort; Null first under ascending, last under descending."""
    keys = list(keys)
    if not keys:
        raise SchemaError("sort needs at least one key")
    resolved = []
    for k in keys:
        resolved.append((rel.schema.index(k.column), k.direction))
    rows = list(rel.rows)
    for i, direction in reversed(resolved):
        rows.sort(key=sort_key_fn(i), reverse=direction == DESC)
    return Relation(rel.schema, tuple(rows))


def count(rel: Relation) -> int:
    return len(rel.rows)


def head(rel: Relation, n: int) -> Relation:
    if n < 0:
        raise ValueError(f"head needs n >= 0, got {n}")
    return Relation(rel.schema, rel.rows[:n])


def union(a: Relation, b: Relation) -> Relation:
    if a.schema != b.schema:
        if len(a.schema) != len(b.schema):
            raise SchemaError(f"union arity mismatch: {len(a.schema)} vs {len(b.schema)}")
        for ca, cb in zip(a.schema.columns, b.schema.columns):
            if ca != cb:
                raise SchemaError(f"union schema mismatch at column {ca.name}:{ca.type} vs {cb.name}:{cb.type}")
    return Relation(a.schema, a.rows + b.rows)


def distinct(rel: Relation) -> Relation:
    return Relation(rel.schema, tuple(dict.fromkeys(rel.rows)))


def _agg_column(agg: Aggregate, schema: Schema) -> Column:
    if agg.kind == "count":
        return Column(agg.output, ColumnType(BaseType.INT))
    src = schema.type_of(agg.column)
    if agg.kind in ("sum", "avg") and src.base not in NUMERIC_TYPES:
        raise TypeError(f"{agg.kind} needs an Int or Float column, {agg.column} is {src.base}")
    if agg.kind in ("min", "max") and src.base not in ORDERED_TYPES:
        raise TypeError(f"{agg.kind} needs an ordered column, {agg.column} is {src.base}")
    base = BaseType.FLOAT if agg.kind == "avg" else src.base
    return Column(agg.output, ColumnType(base, src.nullable))


def _fold(agg: Aggregate, values: list[Any]) -> Any:
    if agg.kind == "count":
        return len(values)
    present = [v for v in values if v is not None]
    if not present:
        return None
    if agg.kind == "sum":
        return sum(present)
    if agg.kind == "min":
        return min(present)
    if agg.kind == "max":
        return max(present)
    return sum(present) / len(present)


def group_aggregate(rel: Relation, keys: Sequence[str], aggs: Sequence[Aggregate]) -> Relation:
    """One row per distinct key tuple, in order of first appearance.

    ``count`` counts rows (Nulls included); other aggregates skip Nulls and
    yield Null when a group has no non-null input.
    """
    keys = list(keys)
    key_idx = [rel.schema.index(k) for k in keys]
    agg_cols = [_agg_column(a, rel.schema) for a in aggs]
    out_schema = Schema(tuple(rel.schema.columns[i] for i in key_idx) + tuple(agg_cols))
    agg_idx = [None if a.column is None else rel.schema.index(a.column) for a in aggs]

    groups: dict[tuple, list[tuple]] = {}
    for row in rel.rows:
        groups.setdefault(tuple(row[i] for i in key_idx), []).append(row)
    out = []
    for key, members in groups.items():
        vals = []
        for agg, i in zip(aggs, agg_idx):
            column = members if i is None else [m[i] for m in members]
            vals.append(_fold(agg, column))
        out.append(key + tuple(vals))
    return make_relation(out_schema, out)
