"""Run the frequent-committer case study over one or more projects and print one summary table.

Each ``--project`` takes NAME REPO ISSUES, where REPO is a git checkout or a
commit log file. With no projects given, the bundled fixture corpus is used.

    python scripts/case_study.py
    python scripts/case_study.py --project Gora ~/src/gora gora-issues.json --aliases gora-aliases.json
"""
from __future__ import annotations

import argparse
import sys
import tempfile
import time
from dataclasses import dataclass, field
from typing import Optional

from repoforge.basic_ops import union
from repoforge.cli import VcsError, load_commits
from repoforge.fixture import write_fixture
from repoforge.ingest import IdentityRule, load_alias_map, parse_issue_export
from repoforge.level2_ops import REPORT_SCHEMA, critical_issues_by_frequent_committer, report_relation
from repoforge.relmodel import Relation, make_relation
from repoforge.render import FORMATS, render


@dataclass
class ProjectRun:
    name: str
    repo: str
    issues: str
    aliases: Optional[str] = None


@dataclass
class StudyConfig:
    projects: list[ProjectRun] = field(default_factory=list)
    priority: Optional[str] = "Critical"
    attribution: str = "author"
    issue_type: Optional[str] = None
    format: str = "table"


def run_one(run: ProjectRun, cfg: StudyConfig) -> Relation:
    commits = load_commits(run.repo)
    with open(run.issues, "rb") as fh:
        issues = parse_issue_export(fh)
    identity = IdentityRule()
    if run.aliases:
        with open(run.aliases, "rb") as fh:
            identity = load_alias_map(fh)
    report = critical_issues_by_frequent_committer(
        commits, issues, priority=cfg.priority, identity=identity,
        attribution=cfg.attribution, issue_type=cfg.issue_type, project=run.name,
    )
    return report_relation(report)


def run_study(cfg: StudyConfig) -> Relation:
    table = make_relation(REPORT_SCHEMA)
    for run in cfg.projects:
        t0 = time.perf_counter()
        table = union(table, run_one(run, cfg))
        print(f"{run.name}: {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return table


def parse_args(argv=None) -> StudyConfig:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--project", nargs=3, action="append", metavar=("NAME", "REPO", "ISSUES"), default=[])
    ap.add_argument("--aliases", help="alias map applied to every project")
    ap.add_argument("--priority", default="Critical", help="'any' disables the priority filter")
    ap.add_argument("--attribution", choices=("author", "assignee"), default="author")
    ap.add_argument("--issue-type")
    ap.add_argument("--format", choices=FORMATS, default="table")
    a = ap.parse_args(argv)
    runs = [ProjectRun(n, r, i, a.aliases) for n, r, i in a.project]
    priority = None if a.priority.lower() == "any" else a.priority
    return StudyConfig(runs, priority, a.attribution, a.issue_type, a.format)


def main(argv=None) -> int:
    cfg = parse_args(argv)
    with tempfile.TemporaryDirectory() as tmp:
        if not cfg.projects:
            paths = write_fixture(tmp)
            cfg.projects = [ProjectRun("fixture", paths["commits"], paths["issues"], paths["aliases"])]
        try:
            table = run_study(cfg)
        except (VcsError, OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    sys.stdout.write(render(table, cfg.format))
    return 0


if __name__ == "__main__":
    sys.exit(main())
