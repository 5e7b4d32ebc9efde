import random
from datetime import timedelta

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from gen import gen_keyed_relation
from repoforge import basic_ops as ops
from repoforge.basic_ops import Aggregate, SortKey
from repoforge.fixture import commit_instant, commit_records
from repoforge.ingest import normalize_identity
from repoforge.level1_ops import RankedEntry, find_max, find_min, frequency_rank, time_window, top_k
from repoforge.relmodel import BaseType, SchemaError, make_relation, schema

AUTHORS = schema(("author", BaseType.TEXT))


def authors(*names):
    return make_relation(AUTHORS, [[n] for n in names])


def test_frequency_rank():
    out = frequency_rank(authors("A", "B", "A", "C", "A", "B"), "author")
    assert out.rows == (("A", 3), ("B", 2), ("C", 1))
    assert out.names == ("author", "count")


def test_frequency_rank_empty_keeps_schema():
    out = frequency_rank(authors(), "author")
    assert out.rows == ()
    assert out.names == ("author", "count")


def test_frequency_rank_fixture_matches_oracle(fixture_commits):
    want = oracles.ranked([c["author_email"] for c in commit_records()])
    assert list(frequency_rank(fixture_commits, "author_email").rows) == want


def test_find_max():
    assert find_max(authors("A", "B", "A"), "author") == RankedEntry("A", 2)
    assert find_max(authors(), "author") is None
    assert find_max(authors("B", "A"), "author") == RankedEntry("A", 1)


def test_find_min():
    assert find_min(authors("A", "B", "A"), "author") == RankedEntry("B", 1)
    assert find_min(authors(), "author") is None
    assert find_min(authors("C", "B", "A"), "author") == RankedEntry("A", 1)


def test_unknown_key_column():
    with pytest.raises(SchemaError):
        find_max(authors("A"), "nobody")


def test_top_k(fixture_commits):
    rel = authors("A", "B", "A")
    assert top_k(rel, "author", 0).rows == ()
    assert top_k(rel, "author", 5) == frequency_rank(rel, "author")
    want = oracles.ranked([c["author_email"] for c in commit_records()])[:2]
    assert list(top_k(fixture_commits, "author_email", 2).rows) == want
    with pytest.raises(ValueError):
        top_k(rel, "author", -1)


def test_time_window(fixture_commits):
    first, last = commit_instant(0), commit_instant(19)
    assert time_window(fixture_commits, "timestamp", first, last + timedelta(seconds=1)) == fixture_commits
    assert ops.count(time_window(fixture_commits, "timestamp", first, first)) == 0
    ten = time_window(fixture_commits, "timestamp", first, commit_instant(10))
    assert ops.count(ten) == 10
    assert ten.rows == fixture_commits.rows[:10]


def test_time_window_errors(fixture_commits):
    t = commit_instant(3)
    with pytest.raises(ValueError):
        time_window(fixture_commits, "timestamp", t, t - timedelta(seconds=1))
    with pytest.raises(SchemaError):
        time_window(fixture_commits, "hash", t, t)


def test_aliases_merge_in_ranking(fixture_commits):
    from repoforge.fixture import ALIASES
    from repoforge.ingest import IdentityRule

    merged = frequency_rank(normalize_identity(fixture_commits, IdentityRule(ALIASES)), "developer_id")
    want = oracles.ranked([oracles.canonical(c["author_email"], ALIASES) for c in commit_records()])
    assert list(merged.rows) == want
    assert merged.rows[0] == ("a@x.org", 8)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=200)
@given(seeds)
def test_find_max_is_the_basic_composition(seed):
    rel = gen_keyed_relation(random.Random(seed))
    composed = ops.head(
        ops.sort(
            ops.group_aggregate(rel, ["key"], [Aggregate("count", output="count")]),
            [SortKey("count", "desc"), SortKey("key", "asc")],
        ),
        1,
    )
    got = find_max(rel, "key")
    if got is None:
        assert composed.rows == ()
    else:
        assert composed.rows == ((got.key, got.count),)
        assert type(composed.rows[0][0]) is type(got.key)


@settings(max_examples=100)
@given(seeds)
def test_find_max_ignores_row_order(seed):
    rng = random.Random(seed)
    rel = gen_keyed_relation(rng)
    rows = list(rel.rows)
    rng.shuffle(rows)
    assert find_max(rel, "key") == find_max(make_relation(rel.schema, rows), "key")


@settings(max_examples=100)
@given(seeds)
def test_rank_counts_sum_to_row_count(seed):
    rel = gen_keyed_relation(random.Random(seed))
    assert sum(r[1] for r in frequency_rank(rel, "key").rows) == ops.count(rel)


@settings(max_examples=100)
@given(seeds, st.integers(0, 20), st.integers(0, 20), st.integers(0, 20))
def test_adjacent_windows_partition(seed, x, y, z):
    from repoforge.fixture import expected_commits

    rel = expected_commits()
    a, b, c = sorted(commit_instant(0) + timedelta(days=d) for d in (x, y, z))
    left = time_window(rel, "timestamp", a, b)
    right = time_window(rel, "timestamp", b, c)
    assert not set(left.rows) & set(right.rows)
    assert sorted(ops.union(left, right).rows) == sorted(time_window(rel, "timestamp", a, c).rows)
