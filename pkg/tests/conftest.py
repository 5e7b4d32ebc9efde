import pytest

from acceptance_log import RESULTS
from repoforge import fixture
from repoforge.ingest import parse_commit_log, parse_issue_export


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    fixture.write_fixture(d)
    return d


@pytest.fixture(scope="session")
def fixture_commits():
    return parse_commit_log(fixture.commits_jsonl())


@pytest.fixture(scope="session")
def fixture_issues():
    return parse_issue_export(fixture.issues_json())


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in RESULTS:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}{' - ' + detail if detail else ''}")
