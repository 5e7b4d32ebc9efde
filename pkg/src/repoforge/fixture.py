"""A small, hand-built project history used by tests, scripts and the README.

20 commits by four developers (three of them committing under an alias),
8 issues of which 3 are resolved with Critical priority, and 9 issue-key
mentions in commit messages, one of which points at an issue that does not
exist. After alias merging, Alice is the most frequent committer (8 commits)
and authored commits linked to 2 of the resolved critical issues.

Every value is produced twice: as the serialized files and as the relation
those files should parse into.
"""
from __future__ import annotations

import hashlib
import json
import os
from datetime import datetime, timedelta, timezone

from .ingest import COMMIT_SCHEMA, ISSUE_SCHEMA, FIELD_SEP, RECORD_SEP
from .relmodel import Relation, make_relation

ALIASES = {
    "alice@home.net": "a@x.org",
    "bob.brown@corp.com": "b@y.org",
    "cchen@old.org": "c@z.org",
}

# (author_name, author_email, message)
_COMMITS = [
    ("Alice Anders", "a@x.org", "GORA-1: fix NPE in store\n\nFix GORA-1 and GORA-1 again"),
    ("Bob Brown", "b@y.org", "Initial build scripts"),
    ("alice", "alice@home.net", "GORA-2 handle empty region"),
    ("Carol Chen", "c@z.org", "GORA-6 null checks"),
    ("Bob Brown", "b@y.org", "GORA-3: critical fix for flush"),
    ("Alice Anders", "A@X.ORG", "Follow-up for GORA-2"),
    ("Dan Dietz", "d@w.org", "GORA-7 cleanup task"),
    ("Bob Brown", "b@y.org", "refactor"),
    ("Alice Anders", "alice@home.net", "Improve GORA-5 query planner"),
    ("Carol Chen", "cchen@old.org", "docs, \"quoted\" and\ttabbed"),
    ("Alice Anders", "a@x.org", "GORA-4 partial work"),
    ("Bob Brown", "bob.brown@corp.com", "see GORA-99 (moved to another tracker)"),
    ("Alice Anders", "a@x.org", "tests"),
    ("Carol Chen", "c@z.org", "typo in gora-3 comment"),
    ("Bob Brown", "b@y.org", "bump version"),
    ("Alice Anders", "alice@home.net", "merge branch 'stable'"),
    ("Dan Dietz", "d@w.org", "ci config"),
    ("Carol Chen", "cchen@old.org", "javadoc"),
    ("Bob Brown", "b@y.org", "release notes"),
    ("Alice Anders", "alice@home.net", "cleanup"),
]

_OFFSETS = [timedelta(0), timedelta(hours=2), timedelta(hours=-5), timedelta(hours=5, minutes=30)]
_BASE = datetime(2017, 3, 1, 9, 0, tzinfo=timezone.utc)

_CREATED = "2017-02-{:02d}T12:00:00Z"
# key, type, priority, status, resolution, assignee_name, assignee_email, created_at, resolved_at
_ISSUES = [
    ("GORA-1", "Bug", "Critical", "Resolved", "Fixed", "Alice Anders", "a@x.org", _CREATED.format(1), "2017-03-02T10:00:00Z"),
    ("GORA-2", "Bug", "CRITICAL", "Closed", "Fixed", "Bob Brown", "b@y.org", _CREATED.format(2), "2017-03-09T10:00:00Z"),
    ("GORA-3", "Bug", "Critical", "Resolved", "Fixed", "Bob Brown", "b@y.org", _CREATED.format(3), "2017-03-06T10:00:00Z"),
    ("GORA-4", "Bug", "Critical", "Open", None, "Alice Anders", "alice@home.net", _CREATED.format(4), None),
    ("GORA-5", "Improvement", "Major", "Resolved", "Fixed", "Alice Anders", "a@x.org", _CREATED.format(5), "2017-03-20T10:00:00Z"),
    ("GORA-6", "Bug", None, "Resolved", "Fixed", None, None, _CREATED.format(6), "2017-03-10T10:00:00Z"),
    ("GORA-7", "Task", "Minor", "Open", None, "Dan Dietz", "d@w.org", _CREATED.format(7), None),
    ("GORA-8", "Bug", "Blocker", "Closed", "Won't Fix", None, None, _CREATED.format(8), "2017-02-20T10:00:00Z"),
]

N_COMMITS = 20
N_ISSUES = 8
FREQUENT_COMMITTER = "a@x.org"
FREQUENT_COMMITTER_NAME = "Alice Anders"
FREQUENT_COMMITTER_COMMITS = 8
RESOLVED_CRITICAL = 3
RESOLVED_CRITICAL_BY_FREQUENT = 2


def commit_hash(i: int) -> str:
    return hashlib.sha1(f"gora-fixture-{i}".encode()).hexdigest()


def commit_instant(i: int) -> datetime:
    """Strictly increasing UTC instants."""
    return _BASE + timedelta(days=i, minutes=17 * i)


def _written_timestamp(i: int) -> str:
    offset = _OFFSETS[i % len(_OFFSETS)]
    local = commit_instant(i).astimezone(timezone(offset))
    return local.isoformat()


def commit_records() -> list[dict]:
    """Commits as they appear in the jsonl file (timestamps carry mixed offsets)."""
    return [
        {"hash": commit_hash(i), "author_name": name, "author_email": email,
         "timestamp": _written_timestamp(i), "message": msg}
        for i, (name, email, msg) in enumerate(_COMMITS)
    ]


def issue_records() -> list[dict]:
    fields = ISSUE_SCHEMA.names
    out = []
    for row in _ISSUES:
        rec = dict(zip(fields, row))
        # absent and explicit-null optional fields are both exercised
        if rec["resolution"] is None:
            del rec["resolution"]
        out.append(rec)
    return out


def expected_commits() -> Relation:
    rows = [(commit_hash(i), name, email, commit_instant(i), msg) for i, (name, email, msg) in enumerate(_COMMITS)]
    return make_relation(COMMIT_SCHEMA, rows)


def _utc(s):
    return None if s is None else datetime.strptime(s, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


def expected_issues() -> Relation:
    return make_relation(ISSUE_SCHEMA, [row[:7] + (_utc(row[7]), _utc(row[8])) for row in _ISSUES])


def commits_jsonl() -> str:
    return "".join(json.dumps(rec, ensure_ascii=False) + "\n" for rec in commit_records())


def issues_json() -> str:
    return json.dumps(issue_records(), indent=2) + "\n"


def commits_git_records() -> str:
    """The same history as ``git log --pretty=format:...`` would print it."""
    chunks = []
    for rec in commit_records():
        chunks.append(FIELD_SEP.join(rec[k] for k in COMMIT_SCHEMA.names) + RECORD_SEP)
    return "\n".join(chunks) + "\n"


def write_fixture(directory) -> dict[str, str]:
    """Write the corpus into ``directory``; return the file paths by role."""
    os.makedirs(directory, exist_ok=True)
    files = {
        "commits": ("commits.jsonl", commits_jsonl()),
        "git_records": ("commits.gitlog", commits_git_records()),
        "issues": ("issues.json", issues_json()),
        "aliases": ("aliases.json", json.dumps(ALIASES, indent=2, sort_keys=True) + "\n"),
    }
    paths = {}
    for role, (name, content) in files.items():
        path = os.path.join(directory, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(content)
        paths[role] = path
    return paths
