"""Level 1 operators: fixed compositions of basic operators.

Each operator here is nothing more than a chain of calls into ``basic_ops``;
``find_max`` is project -> group count -> sort -> take first.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Any, Optional

from . import basic_ops as ops
from .basic_ops import ASC, DESC, Aggregate, SortKey
from .expr import Col, Compare, Lit, conjoin
from .relmodel import BaseType, Relation, SchemaError

COUNT = "count"


@dataclass(frozen=True)
class RankedEntry:
    key: Any
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"a ranked entry has count >= 1, got {self.count}")


def group_count(rel: Relation, key: str) -> Relation:
    return ops.group_aggregate(rel, [key], [Aggregate(COUNT, output=COUNT)])


def _rank(rel: Relation, key: str, count_direction: str) -> Relation:
    grouped = group_count(ops.project(rel, [key]), key)
    return ops.sort(grouped, [SortKey(COUNT, count_direction), SortKey(key, ASC)])


def frequency_rank(rel: Relation, key: str) -> Relation:
    """``{key, count}`` rows, most frequent first, ties by ascending key."""
    return _rank(rel, key, DESC)


def _first_entry(ranked: Relation) -> Optional[RankedEntry]:
    top = ops.head(ranked, 1)
    if not top.rows:
        return None
    key, n = top.rows[0]
    return RankedEntry(key, n)


def find_max(rel: Relation, key: str) -> Optional[RankedEntry]:
    return _first_entry(_rank(rel, key, DESC))


def find_min(rel: Relation, key: str) -> Optional[RankedEntry]:
    return _first_entry(_rank(rel, key, ASC))


def top_k(rel: Relation, key: str, k: int) -> Relation:
    if k < 0:
        raise ValueError(f"top_k needs k >= 0, got {k}")
    return ops.head(frequency_rank(rel, key), k)


def time_window(rel: Relation, ts: str, start: datetime, end: datetime) -> Relation:
    """Rows with ``start <= ts < end``."""
    if rel.schema.type_of(ts).base is not BaseType.TIMESTAMP:
        raise SchemaError(f"column {ts!r} is not a Timestamp")
    if start.tzinfo is None or end.tzinfo is None:
        raise ValueError("window bounds must be timezone-aware")
    if start > end:
        raise ValueError(f"window start {start.isoformat()} is after end {end.isoformat()}")
    pred = conjoin(Compare(">=", Col(ts), Lit(start)), Compare("<", Col(ts), Lit(end)))
    return ops.filter(rel, pred)
