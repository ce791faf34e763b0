"""Cyclic, non-increasing temporal random walks anchored on a head relation."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import EmptyCandidateSet, NoHeadEdges
from .graph import Edge, TkgStore


class Distribution(str, enum.Enum):
    UNIFORM = "unif"
    EXPONENTIAL = "exp"


@dataclass(frozen=True)
class TemporalWalk:
    """A sampled head edge followed by ``length`` body edges walked backward in time.

    ``body_edges[0]`` starts at the head's object; the last body edge ends at
    the head's subject.
    """

    head_edge: Edge
    body_edges: tuple[Edge, ...]

    @property
    def length(self) -> int:
        return len(self.body_edges)


def _feasible_indices(store: TkgStore, m: int, l: int, current: Edge, head_subject: int) -> np.ndarray:
    node = current.object
    if m == 2:
        start, end = store.adjacency_range(node, 0, current.timestamp)
    else:
        start, end = store.adjacency_range(node, 0, current.timestamp + 1)
    idx = np.arange(start, end)
    if m > 2 and len(idx):
        # the inverse of the previous edge has the same timestamp, so it can
        # only appear once the bound is non-strict
        inv = ((store.rel[idx] == store.inverse(current.relation))
               & (store.obj[idx] == current.subject)
               & (store.ts[idx] == current.timestamp))
        idx = idx[~inv]
    if m == l + 1 and len(idx):
        idx = idx[store.obj[idx] == head_subject]
    return idx


def feasible_transitions(store: TkgStore, m: int, current: Edge, head_subject: int, l: int) -> list[Edge]:
    """Edges the walker may take at step ``m`` (2 <= m <= l + 1) after ``current``."""
    if not 2 <= m <= l + 1:
        raise ValueError(f"step {m} outside 2..{l + 1}")
    return [store.edge(i) for i in _feasible_indices(store, m, l, current, head_subject)]


def transition_probabilities(candidates, current_t: int, dist: Distribution) -> np.ndarray:
    """Probability of each candidate edge (or timestamp) being taken next.

    Exponential weights ``exp(t_u - current_t)`` are normalised after shifting
    by the largest exponent, so very old candidates cannot underflow the sum.
    """
    n = len(candidates)
    if n == 0:
        raise EmptyCandidateSet("no feasible transitions")
    if Distribution(dist) is Distribution.UNIFORM:
        return np.full(n, 1.0 / n)
    times = np.array([c.timestamp if isinstance(c, Edge) else c for c in candidates], dtype=float)
    z = times - current_t
    w = np.exp(z - z.max())
    return w / w.sum()


def _choose(store: TkgStore, idx: np.ndarray, current_t: int, dist: Distribution, rng) -> int:
    if dist is Distribution.UNIFORM or len(idx) == 1:
        return int(idx[rng.integers(len(idx))])
    z = store.ts[idx].astype(float) - current_t
    w = np.exp(z - z.max())
    cdf = np.cumsum(w)
    k = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return int(idx[min(k, len(idx) - 1)])


def sample_transition(store: TkgStore, candidates: np.ndarray, current_t: int,
                      dist: Distribution, rng: np.random.Generator) -> int:
    """Draw one edge index from ``candidates`` according to ``dist``."""
    if len(candidates) == 0:
        raise EmptyCandidateSet("no feasible transitions")
    return _choose(store, np.asarray(candidates), current_t, Distribution(dist), rng)


def sample_temporal_walk(store: TkgStore, head_relation: int, l: int, dist: Distribution,
                         rng: np.random.Generator) -> TemporalWalk | None:
    """Sample one cyclic walk of ``l`` body steps, or ``None`` on a dead end.

    The head edge is uniform over edges of ``head_relation``; later steps follow
    ``dist``.
    """
    if l < 1:
        raise ValueError("walk length must be >= 1")
    heads = store.relation_edges(head_relation)
    if len(heads) == 0:
        raise NoHeadEdges(f"relation {head_relation} has no edges")
    dist = Distribution(dist)
    head = store.edge(int(heads[rng.integers(len(heads))]))
    current = head
    body = []
    for m in range(2, l + 2):
        idx = _feasible_indices(store, m, l, current, head.subject)
        if len(idx) == 0:
            return None
        current = store.edge(_choose(store, idx, current.timestamp, dist, rng))
        body.append(current)
    return TemporalWalk(head, tuple(body))
