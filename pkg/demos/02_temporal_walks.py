"""
Sampling walks backwards in time
================================

"""

import collections

import numpy as np

from tkgrules import Distribution, build_store, sample_temporal_walk, transition_probabilities
from tkgrules.synthetic import causal_events

store = build_store(causal_events(seed=1))
vocab = store.vocab
sign = vocab.relation_id("sign")
rng = np.random.default_rng(0)

# a walk starts at a 'sign' edge, steps to strictly earlier edges and returns to its start
for _ in range(20):
    walk = sample_temporal_walk(store, sign, 1, Distribution.EXPONENTIAL, rng)
    if walk is not None:
        break
for e in (walk.head_edge, *walk.body_edges):
    print(vocab.entity_name(e.subject), vocab.relation_name(e.relation), vocab.entity_name(e.object), e.timestamp)

# the exponential distribution prefers edges close in time to the current one
print(transition_probabilities([8, 9, 3], 10, Distribution.EXPONENTIAL).round(3))
print(transition_probabilities([8, 9, 3], 10, Distribution.UNIFORM).round(3))

# success rates per length: longer walks have more chances to dead-end
for length in (1, 2, 3):
    got = sum(sample_temporal_walk(store, sign, length, Distribution.EXPONENTIAL, rng) is not None
              for _ in range(300))
    print(f"length {length}: {got}/300 walks closed their cycle")

counts = collections.Counter()
for _ in range(300):
    w = sample_temporal_walk(store, sign, 1, Distribution.EXPONENTIAL, rng)
    if w is not None:
        counts[vocab.relation_name(w.body_edges[0].relation)] += 1
print(counts.most_common(3))
