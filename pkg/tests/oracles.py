"""Brute-force reference implementations used as test oracles.

Everything here works on plain Python tuples built straight from the encoded
base facts, independent of the store's sorted indices.
"""

from collections import defaultdict


def augmented_facts(base_facts, num_base_relations):
    facts = set()
    for s, r, o, t in base_facts:
        facts.add((s, r, o, t))
        facts.add((o, r + num_base_relations, s, t))
    return facts


def inverse_relation(r, num_base_relations):
    return r - num_base_relations if r >= num_base_relations else r + num_base_relations


class FactIndex:
    def __init__(self, facts):
        self.facts = set(facts)
        self.out = defaultdict(list)
        for f in self.facts:
            self.out[f[0]].append(f)


def check_walk(walk, facts, num_base_relations):
    """List of violated walk properties (empty when the walk is valid)."""
    problems = []
    head = tuple(walk.head_edge)
    body = [tuple(e) for e in walk.body_edges]
    for e in [head] + body:
        if e not in facts:
            problems.append(f"edge {e} not in graph")
    prev = head
    for m, e in enumerate(body, start=2):
        if e[0] != prev[2]:
            problems.append(f"step {m} does not chain")
        if m == 2 and not e[3] < prev[3]:
            problems.append("head time not strictly after body")
        if m > 2 and not e[3] <= prev[3]:
            problems.append(f"step {m} goes forward in time")
        if m > 2 and e == (prev[2], inverse_relation(prev[1], num_base_relations), prev[0], prev[3]):
            problems.append(f"step {m} takes the inverse of the previous edge")
        prev = e
    if body[-1][2] != head[0]:
        problems.append("walk is not cyclic")
    return problems


def enumerate_walks(facts, head_relation, l, num_base_relations):
    """All cyclic walks with ``l`` body steps, as tuples of edges."""
    idx = FactIndex(facts)
    found = []

    def rec(path):
        m = len(path) + 1
        cur = path[-1]
        if m == l + 2:
            if cur[2] == path[0][0]:
                found.append(tuple(path))
            return
        for e in idx.out[cur[2]]:
            if m == 2 and not e[3] < cur[3]:
                continue
            if m > 2:
                if not e[3] <= cur[3]:
                    continue
                if e == (cur[2], inverse_relation(cur[1], num_base_relations), cur[0], cur[3]):
                    continue
            if m == l + 1 and e[2] != path[0][0]:
                continue
            rec(path + [e])

    for h in sorted(f for f in facts if f[1] == head_relation):
        rec([h])
    return found


def pattern_holds(entities, pattern):
    seen = {}
    for e, v in zip(entities, pattern):
        if v in seen and seen[v] != e:
            return False
        seen.setdefault(v, e)
    return True


def dfs_groundings(facts, body_relations, pattern, subject=None, lo=0, hi=float("inf"), limit=None):
    """Depth-first enumeration of body groundings.

    Starts from ``subject`` (or from every edge of the first relation when
    ``subject`` is None) and only uses edges with ``lo <= t < hi``.  Returns a
    set of ``(entities, timestamps)`` tuples and the number of partial walks
    visited; raises ``OverflowError`` past ``limit`` partial walks.
    """
    out = defaultdict(list)
    for f in facts:
        if lo <= f[3] < hi:
            out[(f[0], f[1])].append(f)
    by_rel = defaultdict(list)
    for f in facts:
        if lo <= f[3] < hi:
            by_rel[f[1]].append(f)
    results = set()
    visited = 0

    def rec(ents, times):
        nonlocal visited
        visited += 1
        if limit is not None and visited > limit:
            raise OverflowError
        i = len(times)
        if i == len(body_relations):
            if pattern_holds(ents, pattern):
                results.add((tuple(ents), tuple(times)))
            return
        for e in out[(ents[-1], body_relations[i])]:
            if times and e[3] < times[-1]:
                continue
            rec(ents + [e[2]], times + [e[3]])

    if subject is None:
        for e in by_rel[body_relations[0]]:
            rec([e[0], e[2]], [e[3]])
    else:
        rec([subject], [])
    return results, visited


def brute_force_supports(facts, head_relation, body_relations, pattern):
    bodies, _ = dfs_groundings(facts, body_relations, pattern)
    heads = defaultdict(list)
    for s, r, o, t in facts:
        if r == head_relation:
            heads[(s, o)].append(t)
    rule_support = sum(1 for ents, times in bodies
                       if any(t > times[-1] for t in heads[(ents[0], ents[-1])]))
    return rule_support, len(bodies)


def brute_force_rank(scores, truth, universe, policy="average", excluded=()):
    """Rank by listing every entity's score explicitly."""
    excluded = set(excluded)
    full = [(e, scores.get(e, 0.0)) for e in range(universe) if e not in excluded]
    s = dict(full)[truth]
    greater = sum(1 for _, v in full if v > s)
    ties = sum(1 for _, v in full if v == s)
    if policy == "best":
        return greater + 1
    if policy == "worst":
        return greater + ties
    # mean over every position the truth could take among its ties
    positions = range(greater + 1, greater + ties + 1)
    return sum(positions) / ties
