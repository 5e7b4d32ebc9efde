"""Collecting data: commit logs, issue exports, and developer identities.

Two commit log encodings are understood:

* ``jsonl``: one JSON object per line with ``hash``, ``author_name``,
  ``author_email``, ``timestamp`` and ``message``.
* ``git_records``: the raw output of
  ``git log --pretty=format:%H%x1f%an%x1f%ae%x1f%aI%x1f%B%x1e``.
"""
from __future__ import annotations

import io
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import IO, Any, Mapping, Optional, Union

from .relmodel import BaseType, Column, ColumnType, Relation, Schema, SchemaError, make_relation, schema

FIELD_SEP = "\x1f"
RECORD_SEP = "\x1e"
GIT_PRETTY_FORMAT = "%H%x1f%an%x1f%ae%x1f%aI%x1f%B%x1e"
FORMATS = ("jsonl", "git_records")

COMMIT_FIELDS = ("hash", "author_name", "author_email", "timestamp", "message")
COMMIT_SCHEMA = schema(
    ("hash", BaseType.TEXT),
    ("author_name", BaseType.TEXT),
    ("author_email", BaseType.TEXT),
    ("timestamp", BaseType.TIMESTAMP),
    ("message", BaseType.TEXT),
)

ISSUE_SCHEMA = schema(
    ("key", BaseType.TEXT),
    ("type", BaseType.TEXT),
    ("priority", BaseType.TEXT, True),
    ("status", BaseType.TEXT),
    ("resolution", BaseType.TEXT, True),
    ("assignee_name", BaseType.TEXT, True),
    ("assignee_email", BaseType.TEXT, True),
    ("created_at", BaseType.TIMESTAMP),
    ("resolved_at", BaseType.TIMESTAMP, True),
)
ISSUE_REQUIRED = ("key", "type", "status", "created_at")
ISSUE_TIMESTAMPS = ("created_at", "resolved_at")

_HASH_RE = re.compile(r"[0-9a-fA-F]{7,64}")
_FRACTION_RE = re.compile(r"\.([0-9]+)(?=[+-][0-9]{2}:?[0-9]{2}$|$)")
ISSUE_KEY_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*-[0-9]+")

Source = Union[bytes, str, IO[bytes], IO[str]]


class ParseError(ValueError):
    """Malformed input; ``record`` is the 1-based line or record number when known."""

    def __init__(self, message: str, record: Optional[int] = None):
        self.record = record
        where = f"record {record}: " if record is not None else ""
        super().__init__(where + message)


def _read_text(data: Source) -> str:
    if hasattr(data, "read"):
        data = data.read()
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from None
    return data


def parse_timestamp(text: str) -> datetime:
    """ISO-8601 with an explicit offset (or ``Z``), normalized to UTC."""
    if not isinstance(text, str):
        raise ValueError(f"timestamp must be a string, got {text!r}")
    s = text.strip()
    if s[-1:] in ("Z", "z"):
        s = s[:-1] + "+00:00"
    # fromisoformat on 3.10 only takes 3 or 6 fractional digits
    s = _FRACTION_RE.sub(lambda m: "." + m.group(1)[:6].ljust(6, "0"), s, count=1)
    ts = datetime.fromisoformat(s)
    if ts.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no UTC offset")
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    ts = ts.astimezone(timezone.utc)
    spec = "seconds" if ts.microsecond == 0 else "microseconds"
    return ts.replace(tzinfo=None).isoformat(timespec=spec) + "Z"


def _commit_row(fields: Mapping[str, Any], record: int) -> tuple:
    for name in COMMIT_FIELDS:
        if name not in fields or fields[name] is None:
            raise ParseError(f"missing field {name!r}", record)
        if not isinstance(fields[name], str):
            raise ParseError(f"field {name!r} must be a string", record)
    if not _HASH_RE.fullmatch(fields["hash"]):
        raise ParseError(f"bad commit hash {fields['hash']!r}", record)
    try:
        ts = parse_timestamp(fields["timestamp"])
    except ValueError as exc:
        raise ParseError(f"bad timestamp: {exc}", record) from None
    return (fields["hash"], fields["author_name"], fields["author_email"], ts, fields["message"])


def _parse_jsonl(text: str) -> list[tuple]:
    rows = []
    # split on "\n" only: str.splitlines also breaks on U+2028, 0x1E, 0x85 and friends,
    # which json.dumps(ensure_ascii=False) leaves unescaped inside strings
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", lineno) from None
        if not isinstance(obj, dict):
            raise ParseError("expected a JSON object", lineno)
        rows.append(_commit_row(obj, lineno))
    return rows


def _parse_git_records(text: str) -> list[tuple]:
    chunks = text.split(RECORD_SEP)
    tail = chunks.pop()
    if tail.strip():
        raise ParseError("trailing data after the last record separator", len(chunks) + 1)
    rows = []
    for n, chunk in enumerate(chunks, start=1):
        # `git log --pretty=format:` puts a newline between records
        if chunk.startswith("\n"):
            chunk = chunk[1:]
        parts = chunk.split(FIELD_SEP, 4)
        if len(parts) != 5:
            raise ParseError(f"expected 5 fields separated by 0x1F, found {len(parts)}", n)
        rows.append(_commit_row(dict(zip(COMMIT_FIELDS, parts)), n))
    return rows


def parse_commit_log(data: Source, format: str = "jsonl") -> Relation:
    text = _read_text(data)
    if format == "jsonl":
        rows = _parse_jsonl(text)
    elif format == "git_records":
        rows = _parse_git_records(text)
    else:
        raise ValueError(f"unknown commit log format {format!r}; expected one of {FORMATS}")
    return make_relation(COMMIT_SCHEMA, rows)


def serialize_commits(rel: Relation, format: str = "jsonl") -> str:
    names = COMMIT_FIELDS
    out = []
    for row in rel.rows:
        rec = dict(zip(rel.names, row))
        values = {n: rec[n] for n in names}
        values["timestamp"] = format_timestamp(values["timestamp"])
        if format == "jsonl":
            out.append(json.dumps(values, ensure_ascii=False) + "\n")
        elif format == "git_records":
            out.append(FIELD_SEP.join(values[n] for n in names) + RECORD_SEP)
        else:
            raise ValueError(f"unknown commit log format {format!r}")
    return "".join(out)


def parse_issue_export(data: Source) -> Relation:
    text = _read_text(data)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, list):
        raise ParseError("issue export must be a JSON array")
    rows = []
    for n, obj in enumerate(doc, start=1):
        if not isinstance(obj, dict):
            raise ParseError("expected an issue object", n)
        label = obj.get("key", f"#{n}")
        row = []
        for col in ISSUE_SCHEMA.columns:
            value = obj.get(col.name)
            if value is None:
                if col.name in ISSUE_REQUIRED:
                    raise ParseError(f"issue {label}: missing field {col.name!r}", n)
                row.append(None)
                continue
            if not isinstance(value, str):
                raise ParseError(f"issue {label}: field {col.name!r} must be a string", n)
            if col.name in ISSUE_TIMESTAMPS:
                try:
                    value = parse_timestamp(value)
                except ValueError as exc:
                    raise ParseError(f"issue {label}: bad {col.name}: {exc}", n) from None
            row.append(value)
        key, created, resolved = row[0], row[7], row[8]
        if not ISSUE_KEY_RE.fullmatch(key):
            raise ParseError(f"issue key {key!r} is not of the form PROJECT-123", n)
        if resolved is not None and resolved < created:
            raise ParseError(f"issue {key}: resolved_at is earlier than created_at", n)
        rows.append(tuple(row))
    return make_relation(ISSUE_SCHEMA, rows)


def serialize_issues(rel: Relation) -> str:
    out = []
    for rec in rel.to_dicts():
        obj = {}
        for col in ISSUE_SCHEMA.columns:
            value = rec.get(col.name)
            if isinstance(value, datetime):
                value = format_timestamp(value)
            obj[col.name] = value
        out.append(obj)
    return json.dumps(out, ensure_ascii=False, indent=2) + "\n"


@dataclass(frozen=True)
class IdentityRule:
    """Lowercase the email, then map known aliases to their canonical address."""

    aliases: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        table = {k.strip().lower(): v.strip().lower() for k, v in self.aliases.items()}
        for alias, canonical in table.items():
            if canonical in table and table[canonical] != canonical:
                raise ValueError(f"alias chain: {alias} -> {canonical} -> {table[canonical]}")
        object.__setattr__(self, "aliases", table)

    def canonical(self, email: Optional[str]) -> Optional[str]:
        if email is None:
            return None
        key = email.strip().lower()
        return self.aliases.get(key, key)


def load_alias_map(data: Source) -> IdentityRule:
    try:
        obj = json.loads(_read_text(data))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid alias map JSON: {exc.msg}") from None
    if not isinstance(obj, dict) or not all(isinstance(k, str) and isinstance(v, str) for k, v in obj.items()):
        raise ParseError("alias map must be a JSON object of email -> email strings")
    return IdentityRule(obj)


DEVELOPER_ID = "developer_id"


def normalize_identity(commits: Relation, rule: Optional[IdentityRule] = None) -> Relation:
    """Append a ``developer_id`` column: the canonical, lowercased author email."""
    rule = rule or IdentityRule()
    commits.schema.index("author_name")
    email_idx = commits.schema.index("author_email")
    if commits.schema.type_of("author_email").base is not BaseType.TEXT:
        raise SchemaError("author_email must be Text")
    if DEVELOPER_ID in commits.schema:
        raise SchemaError(f"commits already carry a {DEVELOPER_ID!r} column")
    nullable = commits.schema.type_of("author_email").nullable
    out_schema = Schema(commits.schema.columns + (Column(DEVELOPER_ID, ColumnType(BaseType.TEXT, nullable)),))
    rows = tuple(row + (rule.canonical(row[email_idx]),) for row in commits.rows)
    return Relation(out_schema, rows)


def read_path(path, format: Optional[str] = None) -> Relation:
    """Load a commit log from disk, guessing the format from its content if not given."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if format is None:
        format = "git_records" if RECORD_SEP.encode() in raw else "jsonl"
    return parse_commit_log(io.BytesIO(raw), format)
