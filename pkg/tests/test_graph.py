import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tkgrules import (INFINITE, EmptyDataset, MalformedLine, UnparsableTimestamp, build_store,
                      edges_from, load_dataset, parse_quadruple, window_subgraph)
from tkgrules.synthetic import random_quadruples, write_split

from conftest import make_store, random_store


class TestParse:
    def test_fields(self):
        assert parse_quadruple("Angela Merkel\tconsult\tBarack Obama\t2014-08-09\n") == (
            "Angela Merkel", "consult", "Barack Obama", "2014-08-09")

    def test_extra_columns_ignored(self):
        assert parse_quadruple("a\tb\tc\t0\textra") == ("a", "b", "c", "0")

    def test_missing_field(self):
        with pytest.raises(MalformedLine) as err:
            parse_quadruple("a\tb\tc", line_number=7)
        assert err.value.line_number == 7

    def test_custom_separator(self):
        assert parse_quadruple("a,b,c,1", ",") == ("a", "b", "c", "1")

    def test_load_reports_line_number(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("a\tr\tb\t1\n\na\tr\n", encoding="utf-8")
        with pytest.raises(MalformedLine, match="line 3"):
            load_dataset(p)


class TestBuild:
    def test_single_fact_augmented_and_shifted(self):
        s = build_store([("a", "r", "b", "5")])
        v = s.vocab
        a, b, r = v.entity_id("a"), v.entity_id("b"), v.relation_id("r")
        assert sorted(s.edges()) == sorted([(a, r, b, 0), (b, r + 1, a, 0)])
        assert s.min_timestamp == 0

    def test_duplicates_stored_once(self):
        s = build_store([("a", "r", "b", "5"), ("a", "r", "b", "5")])
        assert len(s) == 2

    def test_dates_become_day_offsets(self):
        s = build_store([("x", "r", "y", "2014-07-22"), ("x", "q", "y", "2014-08-09")])
        assert sorted(set(s.ts.tolist())) == [0, 18]
        assert s.vocab.decode_time(18) == "2014-08-09"

    def test_unparsable_timestamp(self):
        with pytest.raises(UnparsableTimestamp):
            build_store([("a", "r", "b", "2014-01-01"), ("a", "r", "b", "yesterday")])

    def test_empty(self):
        with pytest.raises(EmptyDataset):
            build_store([])

    def test_inverse_ids(self):
        s = random_store(1)
        R = s.num_base_relations
        for r in range(2 * R):
            assert s.inverse(s.inverse(r)) == r
            assert (r < R) != s.is_inverse(r)

    def test_adjacency_time_sorted(self):
        s = random_store(2)
        for node in range(s.num_entities):
            a, b = s.adjacency_range(node)
            assert np.all(s.sub[a:b] == node)
            assert np.all(np.diff(s.ts[a:b]) >= 0)

    def test_shared_vocabulary_across_splits(self, tmp_path):
        train = [("a", "r", "b", "2014-01-01"), ("b", "r", "c", "2014-01-03")]
        test = [("a", "q", "d", "2014-01-10")]
        write_split(tmp_path / "train.txt", train)
        write_split(tmp_path / "test.txt", test)
        data = load_dataset(tmp_path / "train.txt", test=tmp_path / "test.txt")
        assert data.test.max_timestamp == 9
        assert data.train.num_entities == data.test.num_entities == 4
        assert len(data.graph) == 6


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n_facts=st.integers(1, 200))
def test_inverse_round_trip(seed, n_facts):
    s = build_store(random_quadruples(12, 3, n_facts, 8, seed))
    edges = set(s.edges())
    for e in edges:
        inv = (e.object, s.inverse(e.relation), e.subject, e.timestamp)
        assert inv in edges
        assert (inv[2], s.inverse(inv[1]), inv[0], inv[3]) == tuple(e)
    assert len(edges) == len(s) == 2 * s.num_base_facts


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_interning_is_bijective(seed):
    quads = random_quadruples(15, 4, 60, 30, seed)
    s = build_store(quads)
    v = s.vocab
    for a, r, b, t in quads:
        assert v.entity_name(v.entity_id(a)) == a
        assert v.relation_name(v.relation_id(r)) == r
        assert v.decode_time(v.encode_time(t)) == t


class TestWindow:
    store = make_store([("a", "r", "b", t) for t in range(4)])

    def times(self, view):
        return sorted(e.timestamp for e in view.edges())

    def test_finite_window(self):
        assert self.times(window_subgraph(self.store, 3, 2)) == [1, 1, 2, 2]

    def test_infinite_window(self):
        assert self.times(window_subgraph(self.store, 3, INFINITE)) == [0, 0, 1, 1, 2, 2]

    def test_query_at_zero_is_empty(self):
        assert len(window_subgraph(self.store, 0, 5)) == 0
        assert len(window_subgraph(self.store, 0)) == 0


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 1000), qt=st.integers(0, 25), w=st.one_of(st.integers(1, 30), st.just(INFINITE)))
def test_window_count_matches_scan(seed, qt, w):
    s = random_store(seed, n_facts=300, n_times=20)
    view = window_subgraph(s, qt, w)
    lo = 0 if w == INFINITE else max(0, qt - w)
    brute = sum(1 for e in s.edges() if lo <= e.timestamp < qt)
    assert len(view) == brute == sum(1 for _ in view.edges())


class TestEdgesFrom:
    store = make_store([("u", "r", "v", 0), ("n", "r", "x", 2), ("n", "r", "y", 5), ("n", "q", "z", 5), ("n", "r", "w", 9)])

    def node(self):
        return self.store.vocab.entity_id("n")

    def test_strict(self):
        assert [e.timestamp for e in edges_from(self.store, self.node(), t_bound=5, strict=True)] == [2]

    def test_non_strict(self):
        assert [e.timestamp for e in edges_from(self.store, self.node(), t_bound=5, strict=False)] == [2, 5, 5]

    def test_relation_filter_empty(self):
        inv = self.store.vocab.relation_id("q^-1")
        assert edges_from(self.store, self.node(), relation=inv, t_bound=100) == []

    def test_relation_filter(self):
        r = self.store.vocab.relation_id("r")
        got = edges_from(self.store, self.node(), relation=r, t_bound=9, strict=False)
        assert [e.timestamp for e in got] == [2, 5, 9]

    def test_view_bounds_apply(self):
        view = window_subgraph(self.store, 9, 5)
        assert [e.timestamp for e in edges_from(view, self.node(), t_bound=INFINITE)] == [5, 5]


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 1000))
def test_full_adjacency_at_max_time(seed):
    s = random_store(seed)
    for node in range(s.num_entities):
        a, b = s.adjacency_range(node)
        full = [s.edge(i) for i in range(a, b)]
        assert edges_from(s, node, t_bound=s.max_timestamp, strict=False) == full
