"""Deterministic text renderings of relations and pipeline results."""
from __future__ import annotations

import csv
import io
import json
from datetime import datetime
from typing import Any

from .ingest import format_timestamp
from .level1_ops import COUNT, RankedEntry
from .level2_ops import CaseStudyReport, report_relation
from .relmodel import NUMERIC_TYPES, BaseType, Relation, base_type_of, make_relation, schema

FORMATS = ("table", "csv", "json")


def to_relation(value: Any) -> Relation:
    """Lift any pipeline result to a relation so every format can render it."""
    if isinstance(value, Relation):
        return value
    if isinstance(value, CaseStudyReport):
        return report_relation(value)
    if isinstance(value, RankedEntry):
        base = base_type_of(value.key) or BaseType.TEXT
        return make_relation(schema(("key", base, True), (COUNT, BaseType.INT)), [(value.key, value.count)])
    if value is None:
        return make_relation(schema(("key", BaseType.TEXT, True), (COUNT, BaseType.INT)))
    if isinstance(value, int) and not isinstance(value, bool):
        return make_relation(schema((COUNT, BaseType.INT)), [(value,)])
    raise TypeError(f"cannot render {type(value).__name__}")


def cell_text(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, datetime):
        return format_timestamp(value)
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, datetime):
        return format_timestamp(value)
    return value


def render_table(rel: Relation) -> str:
    names = list(rel.names)
    body = [[cell_text(v).replace("\n", "\\n") if v is not None else "null" for v in row] for row in rel.rows]
    widths = [len(n) for n in names]
    for row in body:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    right = [c.type.base in NUMERIC_TYPES for c in rel.schema.columns]

    def line(cells):
        out = [c.rjust(w) if r else c.ljust(w) for c, w, r in zip(cells, widths, right)]
        return " | ".join(out).rstrip()

    lines = [line(names), "-+-".join("-" * w for w in widths)]
    lines.extend(line(row) for row in body)
    return "\n".join(lines) + "\n"


def render_csv(rel: Relation) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(rel.names)
    for row in rel.rows:
        writer.writerow([cell_text(v) for v in row])
    return buf.getvalue()


def render_json(rel: Relation) -> str:
    objs = [{n: _json_value(v) for n, v in zip(rel.names, row)} for row in rel.rows]
    return json.dumps(objs, ensure_ascii=False, separators=(",", ":")) + "\n"


def render(value: Any, format: str = "table") -> str:
    rel = to_relation(value)
    if format == "table":
        return render_table(rel)
    if format == "csv":
        return render_csv(rel)
    if format == "json":
        return render_json(rel)
    raise ValueError(f"unknown output format {format!r}; expected one of {FORMATS}")
