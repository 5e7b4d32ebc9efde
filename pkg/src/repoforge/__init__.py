"""Composable operators for querying software repository data.

Layers, bottom up: ``relmodel`` (typed relations), ``basic_ops`` (relational
algebra), ``level1_ops`` (ranking and windows built from basic operators),
``level2_ops`` (issue/commit linking and the frequent-committer case study),
plus ``ingest`` for loading data and ``dsl`` for textual pipelines.
"""
from .basic_ops import Aggregate, SortKey, count, distinct, filter, group_aggregate, join, project, sort, union
from .expr import And, Col, Compare, IsNull, Lit, Not, Or, PredicateError
from .ingest import IdentityRule, normalize_identity, parse_commit_log, parse_issue_export
from .level1_ops import RankedEntry, find_max, find_min, frequency_rank, time_window, top_k
from .level2_ops import (
    CaseStudyReport,
    Developer,
    LinkRule,
    critical_issues_by_frequent_committer,
    issues_resolved_by,
    link_issues,
    resolved_issue_filter,
)
from .relmodel import BaseType, Column, ColumnType, Relation, Schema, SchemaError, make_relation, schema, validate_record

__version__ = "0.1.0"
