"""Left-fold evaluation of a parsed pipeline over files under a root directory."""
from __future__ import annotations

import os
from datetime import datetime
from typing import Any, Callable, Optional, Union

from .. import basic_ops as ops
from .. import level1_ops as l1
from .. import level2_ops as l2
from ..basic_ops import Aggregate, SortKey
from ..expr import And, Col, Compare, Expr, Lit
from ..ingest import IdentityRule, load_alias_map, normalize_identity, parse_commit_log, parse_issue_export, read_path
from ..level1_ops import RankedEntry
from ..level2_ops import CaseStudyReport, LinkRule
from ..relmodel import Relation
from .parser import CommitsSource, InlineSource, IssuesSource, Named, Pipeline, SortSpec, Stage

Result = Union[Relation, int, RankedEntry, CaseStudyReport, None]

class EvalError(Exception):
    """A pipeline that parses but cannot run as written."""


class _Args:
    """Split stage arguments into positional, named, sort keys and sources."""

    def __init__(self, stage: Stage):
        self.stage = stage
        self.positional: list[Any] = []
        self.named: dict[str, Expr] = {}
        for a in stage.args:
            if isinstance(a, Named):
                if a.name in self.named:
                    raise EvalError(f"{stage.name}: duplicate argument {a.name!r}")
                self.named[a.name] = a.value
            else:
                self.positional.append(a)

    def fail(self, message: str) -> EvalError:
        return EvalError(f"{self.stage.name}: {message}")

    def arity(self, lo: int, hi: Optional[int] = None) -> None:
        n = len(self.positional)
        hi = lo if hi is None else hi
        if not lo <= n <= hi:
            want = str(lo) if lo == hi else f"{lo}..{'any' if hi > 99 else hi}"
            raise self.fail(f"expected {want} positional argument(s), got {n}")

    def allow(self, *names: str) -> None:
        extra = set(self.named) - set(names)
        if extra:
            raise self.fail(f"unexpected argument(s) {sorted(extra)}")

    def column(self, i: int) -> str:
        a = self.positional[i]
        if not isinstance(a, Col):
            raise self.fail(f"argument {i + 1} must be a column name")
        return a.name

    def literal(self, i: int, kind: type) -> Any:
        a = self.positional[i]
        if not isinstance(a, Lit) or not isinstance(a.value, kind) or (kind is int and isinstance(a.value, bool)):
            raise self.fail(f"argument {i + 1} must be a {kind.__name__} literal")
        return a.value

    def source(self, i: int):
        a = self.positional[i]
        if not isinstance(a, (CommitsSource, IssuesSource, InlineSource)):
            raise self.fail(f"argument {i + 1} must be commits(...) or issues(...)")
        return a

    def text(self, name: str, default: Optional[str] = None, words: tuple = ()) -> Optional[str]:
        """A named string option; bare identifiers listed in ``words`` are accepted too."""
        if name not in self.named:
            return default
        v = self.named[name]
        if isinstance(v, Lit) and isinstance(v.value, str):
            return v.value
        if isinstance(v, Col) and v.name in words:
            return v.name
        raise self.fail(f"{name}: expected a string")

    def flag(self, name: str, default: bool) -> bool:
        if name not in self.named:
            return default
        v = self.named[name]
        if not (isinstance(v, Lit) and isinstance(v.value, bool)):
            raise self.fail(f"{name}: expected true or false")
        return v.value


def _join_keys(spec: Expr, args: _Args) -> list[tuple[str, str]]:
    if isinstance(spec, Col):
        return [(spec.name, spec.name)]
    if isinstance(spec, Compare) and spec.op == "==" and isinstance(spec.left, Col) and isinstance(spec.right, Col):
        return [(spec.left.name, spec.right.name)]
    if isinstance(spec, And):
        return _join_keys(spec.left, args) + _join_keys(spec.right, args)
    raise args.fail("on: expected a column, 'left == right', or a conjunction of those")


class Evaluator:
    def __init__(self, root: Union[str, os.PathLike] = "."):
        self.root = os.fspath(root)

    def path(self, p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(self.root, p)

    def load(self, src) -> Relation:
        if isinstance(src, InlineSource):
            return src.relation
        if isinstance(src, IssuesSource):
            with open(self.path(src.path), "rb") as fh:
                return parse_issue_export(fh)
        if src.format is None:
            return read_path(self.path(src.path))
        with open(self.path(src.path), "rb") as fh:
            return parse_commit_log(fh, src.format)

    def run(self, ast: Pipeline) -> Result:
        value: Result = self.load(ast.source)
        for i, stage in enumerate(ast.stages, start=1):
            if not isinstance(value, Relation):
                raise EvalError(f"stage {i} ({stage.name}): follows a scalar-producing stage")
            handler: Callable = getattr(self, "stage_" + stage.name, None)
            if handler is None:
                raise EvalError(f"stage {i}: unknown stage {stage.name!r}")
            try:
                value = handler(value, _Args(stage))
            except OSError:
                raise
            except Exception as exc:
                # keep the original exception type, tag it with the stage position
                exc.stage_index = i
                exc.args = (f"stage {i} ({stage.name}): {exc}",)
                raise
        return value

    # stage handlers

    def stage_filter(self, rel, a):
        a.arity(1)
        a.allow()
        return ops.filter(rel, a.positional[0])

    def stage_project(self, rel, a):
        a.arity(1, 999)
        a.allow()
        return ops.project(rel, [a.column(i) for i in range(len(a.positional))])

    stage_select = stage_project

    def stage_join(self, rel, a):
        a.arity(1)
        a.allow("on")
        right = self.load(a.source(0))
        if "on" not in a.named:
            return ops.join(rel, right, [], "cross")
        return ops.join(rel, right, _join_keys(a.named["on"], a), "inner")

    def stage_sort(self, rel, a):
        a.arity(1, 999)
        a.allow()
        keys = []
        for i, k in enumerate(a.positional):
            if isinstance(k, SortSpec):
                keys.append(SortKey(k.column, k.direction))
            else:
                keys.append(SortKey(a.column(i)))
        return ops.sort(rel, keys)

    def stage_count(self, rel, a):
        a.arity(0)
        a.allow()
        return ops.count(rel)

    def stage_union(self, rel, a):
        a.arity(1)
        a.allow()
        return ops.union(rel, self.load(a.source(0)))

    def stage_distinct(self, rel, a):
        a.arity(0)
        a.allow()
        return ops.distinct(rel)

    def stage_group_count(self, rel, a):
        a.arity(1, 999)
        a.allow()
        keys = [a.column(i) for i in range(len(a.positional))]
        return ops.group_aggregate(rel, keys, [Aggregate("count", output=l1.COUNT)])

    def stage_frequency_rank(self, rel, a):
        a.arity(1)
        a.allow()
        return l1.frequency_rank(rel, a.column(0))

    def stage_find_max(self, rel, a):
        a.arity(1)
        a.allow()
        return l1.find_max(rel, a.column(0))

    def stage_find_min(self, rel, a):
        a.arity(1)
        a.allow()
        return l1.find_min(rel, a.column(0))

    def stage_top_k(self, rel, a):
        a.arity(2)
        a.allow()
        return l1.top_k(rel, a.column(0), a.literal(1, int))

    def stage_time_window(self, rel, a):
        a.arity(3)
        a.allow()
        return l1.time_window(rel, a.column(0), a.literal(1, datetime), a.literal(2, datetime))

    def _identity(self, a) -> IdentityRule:
        path = a.text("aliases")
        if path is None:
            return IdentityRule()
        with open(self.path(path), "rb") as fh:
            return load_alias_map(fh)

    def stage_normalize_identity(self, rel, a):
        a.arity(0)
        a.allow("aliases")
        return normalize_identity(rel, self._identity(a))

    def stage_link_issues(self, rel, a):
        a.arity(1)
        a.allow("pattern")
        rule = LinkRule(a.text("pattern", l2.DEFAULT_KEY_PATTERN))
        return l2.link_issues(rel, self.load(a.source(0)), rule)

    def _priority(self, a) -> Optional[str]:
        p = a.text("priority", "any", words=("any",))
        return None if p.lower() == "any" else p

    def stage_resolved_filter(self, rel, a):
        a.arity(0)
        a.allow("priority", "resolved", "type")
        return l2.resolved_issue_filter(rel, self._priority(a), a.flag("resolved", True), a.text("type"))

    def stage_case_study(self, rel, a):
        a.arity(1)
        a.allow("priority", "aliases", "attribution", "type", "pattern", "project")
        a.named.setdefault("priority", Lit("Critical"))
        return l2.critical_issues_by_frequent_committer(
            rel,
            self.load(a.source(0)),
            rule=LinkRule(a.text("pattern", l2.DEFAULT_KEY_PATTERN)),
            priority=self._priority(a),
            identity=self._identity(a),
            attribution=a.text("attribution", "author", words=l2.ATTRIBUTIONS),
            issue_type=a.text("type"),
            project=a.text("project", ""),
        )


def evaluate(ast: Pipeline, root: Union[str, os.PathLike] = ".") -> Result:
    return Evaluator(root).run(ast)
