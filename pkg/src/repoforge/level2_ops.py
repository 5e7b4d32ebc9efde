"""Level 2 operators: issue/commit linking and the frequent-committer case study.

These compose the basic and Level 1 layers; the only new primitive here is
scanning commit messages for issue keys.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from . import basic_ops as ops
from .expr import Col, Compare, Expr, Lit, conjoin
from .ingest import DEVELOPER_ID, IdentityRule, normalize_identity
from .level1_ops import find_max
from .relmodel import BaseType, Relation, SchemaError, make_relation, schema

DEFAULT_KEY_PATTERN = r"\b([A-Z][A-Z0-9]+-[0-9]+)\b"
LINK_METHOD = "message-key-match"
RESOLVED_STATUSES = ("Resolved", "Closed")
ATTRIBUTIONS = ("author", "assignee")

LINK_SCHEMA = schema(
    ("commit_hash", BaseType.TEXT),
    ("issue_key", BaseType.TEXT),
    ("method", BaseType.TEXT),
)


class PatternError(ValueError):
    pass


@dataclass(frozen=True)
class LinkRule:
    key_pattern: str = DEFAULT_KEY_PATTERN

    def __post_init__(self) -> None:
        try:
            rx = re.compile(self.key_pattern)
        except re.error as exc:
            raise PatternError(f"invalid key pattern {self.key_pattern!r}: {exc}") from None
        if rx.groups != 1:
            raise PatternError(f"key pattern needs exactly one capture group, has {rx.groups}")

    @property
    def regex(self) -> re.Pattern:
        return re.compile(self.key_pattern)

    def keys_in(self, message: str) -> list[str]:
        """Distinct keys mentioned in ``message``, ascending."""
        return sorted(set(self.regex.findall(message)))


@dataclass(frozen=True)
class Developer:
    name: str
    email: str

    def __str__(self) -> str:
        if not self.email:
            return self.name
        return f"{self.name} <{self.email}>" if self.name else self.email


@dataclass(frozen=True)
class CaseStudyReport:
    project: str
    total_commits: int
    frequent_committer: Developer
    committer_commit_count: int
    critical_issues_resolved: int

    def __post_init__(self) -> None:
        if min(self.total_commits, self.committer_commit_count, self.critical_issues_resolved) < 0:
            raise ValueError("report counts must be non-negative")
        if self.committer_commit_count > self.total_commits:
            raise ValueError("committer_commit_count exceeds total_commits")


def _require(rel: Relation, what: str, *columns: str) -> None:
    for name in columns:
        if name not in rel.schema:
            raise SchemaError(f"{what} relation needs a {name!r} column; has {list(rel.names)}")
        if rel.schema.type_of(name).base is not BaseType.TEXT:
            raise SchemaError(f"{what}.{name} must be Text")


def link_issues(commits: Relation, issues: Relation, rule: Optional[LinkRule] = None) -> Relation:
    """One ``{commit_hash, issue_key, method}`` row per issue key a commit mentions.

    Keys absent from ``issues`` are dropped. Rows follow commit order, then key order.
    """
    rule = rule or LinkRule()
    _require(commits, "commits", "hash", "message")
    _require(issues, "issues", "key")
    h, m = commits.schema.index("hash"), commits.schema.index("message")
    mentions = make_relation(
        LINK_SCHEMA,
        ((row[h], key, LINK_METHOD) for row in commits.rows if row[m] is not None for key in rule.keys_in(row[m])),
    )
    known = ops.distinct(ops.project(issues, ["key"]))
    linked = ops.join(mentions, known, [("issue_key", "key")])
    return ops.distinct(ops.project(linked, list(LINK_SCHEMA.names)))


def _ci_equals_any(column: str, values: Iterable[str]) -> Expr:
    alts = "|".join(re.escape(v) for v in values)
    return Compare("matches", Col(column), Lit(rf"(?i)\A(?:{alts})\Z"))


def resolved_issue_filter(
    issues: Relation,
    priority: Union[str, Iterable[str], None] = "Critical",
    require_resolved: bool = True,
    issue_type: Union[str, Iterable[str], None] = None,
    resolved_statuses: Iterable[str] = RESOLVED_STATUSES,
) -> Relation:
    """Keep issues of the given priority (case-insensitive; None means any) that are resolved.

    ``issue_type`` optionally restricts the ``type`` column the same way, for
    counting bug fixes rather than critical issues.
    """
    _require(issues, "issues", "priority", "status")
    preds: list[Expr] = []
    if priority is not None:
        preds.append(_ci_equals_any("priority", [priority] if isinstance(priority, str) else priority))
    if issue_type is not None:
        _require(issues, "issues", "type")
        preds.append(_ci_equals_any("type", [issue_type] if isinstance(issue_type, str) else issue_type))
    if require_resolved:
        preds.append(_ci_equals_any("status", resolved_statuses))
    if not preds:
        return issues
    return ops.filter(issues, conjoin(*preds))


def issues_resolved_by(
    commits: Relation,
    issues: Relation,
    links: Relation,
    developer_id: str,
    attribution: str = "author",
    rule: Optional[IdentityRule] = None,
) -> Relation:
    """Distinct issues attributed to ``developer_id``, in ``issues`` order.

    With ``author`` attribution an issue counts when the developer authored at
    least one commit linked to it. With ``assignee`` attribution it counts when
    the issue's canonical assignee email is the developer (links are ignored).
    """
    _require(issues, "issues", "key")
    if attribution == "assignee":
        rule = rule or IdentityRule()
        _require(issues, "issues", "assignee_email")
        idx = issues.schema.index("assignee_email")
        keep = tuple(row for row in issues.rows if rule.canonical(row[idx]) == developer_id)
        return ops.distinct(Relation(issues.schema, keep))
    if attribution != "author":
        raise ValueError(f"attribution must be one of {ATTRIBUTIONS}, got {attribution!r}")

    _require(commits, "commits", "hash", DEVELOPER_ID)
    _require(links, "links", "commit_hash", "issue_key")
    mine = ops.project(ops.filter(commits, Compare("==", Col(DEVELOPER_ID), Lit(developer_id))), ["hash"])
    keys = ops.distinct(ops.project(ops.join(mine, links, [("hash", "commit_hash")]), ["issue_key"]))
    hit = ops.join(issues, keys, [("key", "issue_key")])
    return ops.distinct(ops.project(hit, list(issues.names)))


def _display_name(commits: Relation, developer_id: str) -> str:
    mine = ops.filter(commits, Compare("==", Col(DEVELOPER_ID), Lit(developer_id)))
    top = find_max(mine, "author_name")
    return "" if top is None or top.key is None else top.key


def critical_issues_by_frequent_committer(
    commits: Relation,
    issues: Relation,
    rule: Optional[LinkRule] = None,
    priority: Union[str, Iterable[str], None] = "Critical",
    identity: Optional[IdentityRule] = None,
    attribution: str = "author",
    issue_type: Union[str, Iterable[str], None] = None,
    project: str = "",
) -> CaseStudyReport:
    """Most frequent committer and the resolved issues of ``priority`` attributed to them.

    Runs: normalize identities, find_max on developer_id, link_issues,
    resolved_issue_filter, issues_resolved_by, count.
    """
    identity = identity or IdentityRule()
    total = ops.count(commits)
    normalized = normalize_identity(commits, identity)
    top = find_max(normalized, DEVELOPER_ID)
    if top is None:
        link_issues(normalized, issues, rule)  # column checks still apply to empty input
        return CaseStudyReport(project, 0, Developer("", ""), 0, 0)
    links = link_issues(normalized, issues, rule)
    wanted = resolved_issue_filter(issues, priority, True, issue_type)
    resolved = issues_resolved_by(normalized, wanted, links, top.key, attribution, identity)
    dev = Developer(_display_name(normalized, top.key), top.key)
    return CaseStudyReport(project, total, dev, top.count, ops.count(resolved))


def report_relation(report: CaseStudyReport) -> Relation:
    """The four summary columns of the case study as a one-row relation."""
    return make_relation(
        REPORT_SCHEMA,
        [(report.project, report.total_commits, str(report.frequent_committer), report.critical_issues_resolved)],
    )


REPORT_SCHEMA = schema(
    ("project", BaseType.TEXT),
    ("commits", BaseType.INT),
    ("frequent_developer", BaseType.TEXT),
    ("critical_issues_resolved", BaseType.INT),
)

