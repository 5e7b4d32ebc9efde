"""Command-line entry point.

    repoforge run PIPELINE [--root DIR] [--format table|csv|json]
    repoforge case-study --repo PATH --issues FILE [--priority Critical] ...

Exit status: 0 success, 1 pipeline syntax error, 2 evaluation, data or VCS error.
"""
from __future__ import annotations

import argparse
import os
import subprocess
import sys
from typing import Optional, Sequence, TextIO

from .dsl import EvalError, LexError, evaluate, parse
from .dsl import ParseError as SyntaxParseError
from .expr import PredicateError
from .ingest import GIT_PRETTY_FORMAT, IdentityRule, load_alias_map, parse_commit_log, parse_issue_export, read_path
from .level2_ops import ATTRIBUTIONS, DEFAULT_KEY_PATTERN, LinkRule, PatternError, critical_issues_by_frequent_committer
from .relmodel import Relation, SchemaError
from .render import FORMATS, render

EXIT_OK, EXIT_SYNTAX, EXIT_EVAL = 0, 1, 2
DATA_ERRORS = (EvalError, SchemaError, PredicateError, PatternError, TypeError, ValueError, OSError)


class VcsError(RuntimeError):
    pass


def cmd_run(pipeline_file: str, root: Optional[str] = None, format: str = "table",
            out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        with open(pipeline_file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read {pipeline_file}: {exc.strerror or exc}", file=err)
        return EXIT_EVAL
    try:
        ast = parse(text)
    except (LexError, SyntaxParseError) as exc:
        print(f"{pipeline_file}:{exc.line}:{exc.column}: syntax error: {exc}", file=err)
        return EXIT_SYNTAX
    if root is None:
        root = os.path.dirname(os.path.abspath(pipeline_file))
    try:
        result = evaluate(ast, root)
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=err)
        return EXIT_EVAL
    out.write(render(result, format))
    return EXIT_OK


def git_log(repo: str) -> Relation:
    """Read the full history of a checkout through the git command line."""
    cmd = ["git", "-C", repo, "log", f"--pretty=format:{GIT_PRETTY_FORMAT}"]
    try:
        proc = subprocess.run(cmd, capture_output=True, check=False)
    except FileNotFoundError:
        raise VcsError("git executable not found") from None
    if proc.returncode != 0:
        if _is_empty_repository(repo):
            return parse_commit_log(b"", "git_records")
        raise VcsError(f"git log failed: {proc.stderr.decode('utf-8', 'replace').strip()}")
    return parse_commit_log(proc.stdout, "git_records")


def _is_empty_repository(repo: str) -> bool:
    def ok(*args: str) -> bool:
        return subprocess.run(["git", "-C", repo, *args], capture_output=True).returncode == 0

    return ok("rev-parse", "--git-dir") and not ok("rev-parse", "--verify", "-q", "HEAD")


def load_commits(repo: str) -> Relation:
    if os.path.isdir(repo):
        return git_log(repo)
    return read_path(repo)


def _project_name(repo: str) -> str:
    base = os.path.basename(os.path.normpath(os.path.abspath(repo)))
    return base if os.path.isdir(repo) else os.path.splitext(base)[0]


def cmd_case_study(repo: str, issues: str, priority: str = "Critical", aliases: Optional[str] = None,
                   format: str = "table", attribution: str = "author", issue_type: Optional[str] = None,
                   pattern: str = DEFAULT_KEY_PATTERN, project: Optional[str] = None,
                   out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        commits = load_commits(repo)
        with open(issues, "rb") as fh:
            issue_rel = parse_issue_export(fh)
        identity = IdentityRule()
        if aliases:
            with open(aliases, "rb") as fh:
                identity = load_alias_map(fh)
        wanted = None if priority.lower() == "any" else priority
        report = critical_issues_by_frequent_committer(
            commits,
            issue_rel,
            rule=LinkRule(pattern),
            priority=wanted,
            identity=identity,
            attribution=attribution,
            issue_type=issue_type,
            project=project if project is not None else _project_name(repo),
        )
    except (VcsError, *DATA_ERRORS) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_EVAL
    print(
        f"filter: priority={priority}, type={issue_type or 'any'}, status in Resolved/Closed, attribution={attribution}",
        file=err,
    )
    out.write(render(report, format))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="repoforge", description="Query software repositories with composable operators.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a pipeline file")
    run.add_argument("pipeline", help="pipeline source file")
    run.add_argument("--root", help="directory that relative paths resolve against (default: the pipeline's directory)")
    run.add_argument("--format", choices=FORMATS, default="table")

    cs = sub.add_parser("case-study", help="critical issues resolved by the most frequent committer")
    cs.add_argument("--repo", required=True, help="git checkout, or a commit log file (jsonl or git-records)")
    cs.add_argument("--issues", required=True, help="issue export (JSON array)")
    cs.add_argument("--priority", default="Critical", help="priority to count, or 'any' (default: Critical)")
    cs.add_argument("--issue-type", help="only count issues of this type, e.g. Bug")
    cs.add_argument("--aliases", help="JSON object mapping alias emails to canonical emails")
    cs.add_argument("--attribution", choices=ATTRIBUTIONS, default="author")
    cs.add_argument("--pattern", default=DEFAULT_KEY_PATTERN, help="issue key regex with one capture group")
    cs.add_argument("--project", help="project label for the report (default: repo name)")
    cs.add_argument("--format", choices=FORMATS, default="table")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.pipeline, args.root, args.format)
    return cmd_case_study(
        args.repo,
        args.issues,
        priority=args.priority,
        aliases=args.aliases,
        format=args.format,
        attribution=args.attribution,
        issue_type=args.issue_type,
        pattern=args.pattern,
        project=args.project,
    )


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
