import mpmath
import numpy as np
import pytest

from tkgrules import (Distribution, EmptyCandidateSet, Edge, NoHeadEdges, feasible_transitions,
                      sample_temporal_walk, transition_probabilities)
from tkgrules.walks import sample_transition

from conftest import base_facts, make_store, random_store
from oracles import augmented_facts, check_walk, enumerate_walks


def ids(store, *names):
    return [store.vocab.entity_id(n) for n in names]


class TestFeasible:
    def test_first_step_is_strict(self):
        s = make_store([("u", "u", "v", 0), ("a", "h", "b", 5), ("b", "x", "c", 3), ("b", "x", "d", 5), ("b", "x", "e", 7)])
        a, b = ids(s, "a", "b")
        head = Edge(a, s.vocab.relation_id("h"), b, 5)
        got = feasible_transitions(s, 2, head, a, l=3)
        assert [e.timestamp for e in got] == [3]

    def test_inverse_of_previous_edge_excluded(self):
        s = make_store([("z", "h", "a", 9), ("a", "r", "b", 4), ("b", "q", "c", 4), ("u", "u", "v", 0)])
        a, b, c, z = ids(s, "a", "b", "c", "z")
        r, q = s.vocab.relation_id("r"), s.vocab.relation_id("q")
        got = feasible_transitions(s, 3, Edge(a, r, b, 4), z, l=3)
        assert got == [Edge(b, q, c, 4)]

    def test_last_step_closes_cycle(self):
        s = make_store([("a", "h", "b", 9), ("b", "r", "x", 6), ("x", "p", "a", 5), ("x", "p", "c", 5)])
        a, x = ids(s, "a", "x")
        got = feasible_transitions(s, 3, Edge(ids(s, "b")[0], s.vocab.relation_id("r"), x, 6), a, l=2)
        assert [e.object for e in got] == [a]

    def test_step_out_of_range(self):
        s = make_store([("a", "h", "b", 1)])
        with pytest.raises(ValueError):
            feasible_transitions(s, 1, next(s.edges()), 0, l=2)


class TestProbabilities:
    def test_exponential_symmetry(self):
        p = transition_probabilities([3, 3], 5, Distribution.EXPONENTIAL)
        np.testing.assert_allclose(p, [0.5, 0.5])

    def test_exponential_values(self):
        # independent high-precision evaluation of the normalised weights
        with mpmath.workdps(40):
            w = [mpmath.e ** -1, mpmath.e ** -2]
            expect = [float(x / sum(w)) for x in w]
        p = transition_probabilities([4, 3], 5, Distribution.EXPONENTIAL)
        np.testing.assert_allclose(p, expect, rtol=0, atol=1e-15)
        np.testing.assert_allclose(p, [0.7311, 0.2689], atol=5e-5)

    def test_uniform(self):
        np.testing.assert_allclose(transition_probabilities([1, 2, 3], 5, "unif"), [1 / 3] * 3)

    def test_sums_to_one(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            ts = rng.integers(0, 100, size=rng.integers(1, 30))
            for d in Distribution:
                assert abs(transition_probabilities(ts, 100, d).sum() - 1) < 1e-12

    def test_far_past_does_not_underflow(self):
        p = transition_probabilities([0, 1], 4001, Distribution.EXPONENTIAL)
        assert np.all(np.isfinite(p)) and abs(p.sum() - 1) < 1e-12
        assert p[1] > p[0] > 0

    def test_empty(self):
        with pytest.raises(EmptyCandidateSet):
            transition_probabilities([], 3, Distribution.UNIFORM)


CHAIN = [("a", "h", "b", 2), ("c", "p", "b", 1), ("c", "q", "a", 0)]


class TestSample:
    def test_unique_walk_matches_enumeration(self):
        s = make_store(CHAIN)
        R = s.num_base_relations
        h = s.vocab.relation_id("h")
        facts = augmented_facts(base_facts(s), R)
        walks = enumerate_walks(facts, h, 2, R)
        assert len(walks) == 1
        a, b, c = ids(s, "a", "b", "c")
        p_inv, q = s.vocab.relation_id("p^-1"), s.vocab.relation_id("q")
        assert walks[0] == ((a, h, b, 2), (b, p_inv, c, 1), (c, q, a, 0))
        for seed in range(20):
            w = sample_temporal_walk(s, h, 2, Distribution.EXPONENTIAL, np.random.default_rng(seed))
            assert (tuple(w.head_edge),) + tuple(map(tuple, w.body_edges)) == walks[0]
            assert w.length == 2

    def test_dead_end(self):
        s = make_store([("a", "h", "b", 0)])
        w = sample_temporal_walk(s, s.vocab.relation_id("h"), 1, Distribution.UNIFORM, np.random.default_rng(0))
        assert w is None

    def test_deterministic(self):
        s = random_store(3, n_facts=400)
        for r in s.present_relations():
            w1 = sample_temporal_walk(s, r, 3, "exp", np.random.default_rng([7, r]))
            w2 = sample_temporal_walk(s, r, 3, "exp", np.random.default_rng([7, r]))
            assert w1 == w2

    def test_no_head_edges(self):
        s = make_store(CHAIN)
        with pytest.raises(NoHeadEdges):
            sample_temporal_walk(s, s.vocab.relation_id("h^-1") + 10, 1, "unif", np.random.default_rng(0))

    def test_only_enumerated_walks_are_sampled(self):
        s = random_store(11, n_entities=8, n_relations=2, n_facts=40, n_times=6)
        R = s.num_base_relations
        facts = augmented_facts(base_facts(s), R)
        rng = np.random.default_rng(0)
        for r in s.present_relations():
            for l in (1, 2, 3):
                allowed = set(enumerate_walks(facts, r, l, R))
                for _ in range(50):
                    w = sample_temporal_walk(s, r, l, "exp", rng)
                    if w is None:
                        continue
                    key = (tuple(w.head_edge),) + tuple(map(tuple, w.body_edges))
                    assert key in allowed


@pytest.mark.parametrize("seed", range(5))
def test_walks_valid_on_random_graphs(seed):
    s = random_store(seed, n_entities=30, n_relations=4, n_facts=600, n_times=15)
    R = s.num_base_relations
    facts = augmented_facts(base_facts(s), R)
    rng = np.random.default_rng(seed)
    for r in s.present_relations():
        for l in (1, 2, 3):
            for d in Distribution:
                w = sample_temporal_walk(s, r, l, d, rng)
                if w is not None:
                    assert check_walk(w, facts, R) == []


@pytest.mark.parametrize("dist", list(Distribution))
def test_transition_frequencies_within_three_sigma(dist):
    s = make_store([("a", "h", "b", 10)] + [("b", "x", f"c{i}", t) for i, t in enumerate([0, 5, 8, 9])])
    cand = np.arange(*s.adjacency_range(s.vocab.entity_id("b"), 0, 10))
    cand = cand[s.ts[cand] < 10]
    probs = transition_probabilities(s.ts[cand], 10, dist)
    rng = np.random.default_rng(42)
    n = 10_000
    counts = {int(c): 0 for c in cand}
    for _ in range(n):
        counts[sample_transition(s, cand, 10, dist, rng)] += 1
    for c, p in zip(cand, probs):
        sigma = np.sqrt(n * p * (1 - p))
        assert abs(counts[int(c)] - n * p) <= 3 * sigma + 1e-9


def test_exponential_prefers_closer_timestamps():
    s = random_store(5, n_entities=25, n_relations=3, n_facts=1500, n_times=60)
    gaps = {}
    for d in Distribution:
        rng = np.random.default_rng(1)
        diffs = []
        for r in s.present_relations():
            for _ in range(300):
                w = sample_temporal_walk(s, r, 3, d, rng)
                if w is None:
                    continue
                seq = [w.head_edge, *w.body_edges]
                diffs.extend(seq[i].timestamp - seq[i + 1].timestamp for i in range(1, len(seq) - 1))
        gaps[d] = np.mean(diffs)
    assert gaps[Distribution.EXPONENTIAL] <= gaps[Distribution.UNIFORM]
