"""
Loading quadruples into a temporal graph store
==============================================

"""

import numpy as np

from tkgrules import build_store, edges_from, window_subgraph

# a handful of dated diplomatic events, one per line in the usual tab-separated layout
lines = [
    "Angela Merkel\tconsult\tBarack Obama\t2014-07-22",
    "Barack Obama\tmake statement\tAngela Merkel\t2014-07-22",
    "Angela Merkel\tdiscuss by telephone\tBarack Obama\t2014-08-01",
    "Barack Obama\tconsult\tFrancois Hollande\t2014-08-05",
    "Angela Merkel\tconsult\tBarack Obama\t2014-08-09",
]
quads = [tuple(line.split("\t")) for line in lines]
store = build_store(quads)
print(store)
print(store.stats())

# dates become day offsets from the earliest one
vocab = store.vocab
print("2014-08-09 ->", vocab.encode_time("2014-08-09"))

# every fact also exists backwards, under the inverse relation
merkel = vocab.entity_id("Angela Merkel")
for e in edges_from(store, merkel, t_bound=np.inf):
    print(vocab.entity_name(e.subject), "|", vocab.relation_name(e.relation), "|",
          vocab.entity_name(e.object), "|", vocab.decode_time(e.timestamp))

# a query at 2014-08-09 only sees the facts strictly before it
view = window_subgraph(store, vocab.encode_time("2014-08-09"))
print(len(view), "of", len(store), "edges are visible")
