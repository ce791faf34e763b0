"""Answering forecasting queries by grounding rule bodies in a time window."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import NoGroundings
from .graph import SubgraphView, Vocabulary
from .rules import TemporalRule, format_atom


@dataclass(frozen=True)
class Query:
    """``(subject, relation, ?, query_time)``; subject prediction uses the inverse relation."""

    subject: int
    relation: int
    query_time: int


@dataclass
class BodyGroundings:
    """Body groundings of one rule from one subject.

    ``entities[j]`` holds ``e_1..e_{l+1}`` and ``timestamps[j]`` holds
    ``t_1..t_l`` of grounding ``j``.
    """

    entities: np.ndarray
    timestamps: np.ndarray

    def __len__(self) -> int:
        return len(self.entities)

    @property
    def candidates(self) -> np.ndarray:
        return self.entities[:, -1]

    def by_candidate(self) -> dict[int, "BodyGroundings"]:
        out = {}
        cand = self.candidates
        for c in np.unique(cand):
            m = cand == c
            out[int(c)] = BodyGroundings(self.entities[m], self.timestamps[m])
        return out

    def as_set(self) -> set[tuple[tuple[int, ...], tuple[int, ...]]]:
        return {(tuple(map(int, e)), tuple(map(int, t)))
                for e, t in zip(self.entities, self.timestamps)}


def _first_positions(pattern: Sequence[int]) -> list[int]:
    first: dict[int, int] = {}
    return [first.setdefault(v, pos) for pos, v in enumerate(pattern)]


def find_body_groundings(view: SubgraphView, rule: TemporalRule, subject: int,
                         K: int | None = None) -> BodyGroundings:
    """Staged join of the rule body starting at ``subject`` inside ``view``.

    Each stage extends partial walks by edges of the next body relation whose
    timestamp is at least the previous one.  Walks breaking a variable
    constraint are dropped as soon as the constraint can be checked.  With
    ``K`` set, at most ``K`` partial walks survive each stage, preferring later
    timestamps and then smaller entity ids.
    """
    store = view.base
    first = _first_positions(rule.var_pattern)
    E = np.array([[subject]], dtype=np.int64)
    T = np.zeros((1, 0), dtype=np.int64)
    for i, rel in enumerate(rule.body_relations):
        t_lo = view.lo if i == 0 else np.maximum(T[:, -1], view.lo)
        rows, idx = store.expand(E[:, -1], rel, t_lo, view.hi)
        E = np.column_stack([E[rows], store.obj[idx]])
        T = np.column_stack([T[rows], store.ts[idx]])
        j = first[i + 1]
        if j != i + 1:
            keep = E[:, i + 1] == E[:, j]
            E, T = E[keep], T[keep]
        if K is not None and len(E) > K:
            order = np.lexsort((E[:, -1], -T[:, -1]))[:K]
            E, T = E[order], T[order]
        if len(E) == 0:
            break
    return BodyGroundings(E.reshape(-1, rule.length + 1), T.reshape(-1, rule.length))


def score_candidate(rule: TemporalRule, groundings, query_time: int, a: float = 0.5,
                    lam: float = 0.1) -> float:
    """``a * conf + (1 - a) * exp(-lam * (query_time - t1))`` with ``t1`` the latest first-body time.

    ``groundings`` is a :class:`BodyGroundings` or an iterable of ``t_1`` values.
    """
    if isinstance(groundings, BodyGroundings):
        t1s = groundings.timestamps[:, 0] if len(groundings) else []
    else:
        t1s = list(groundings)
    if len(t1s) == 0:
        raise NoGroundings("cannot score a candidate without groundings")
    t1 = int(max(t1s))
    return a * rule.confidence + (1.0 - a) * math.exp(-lam * (query_time - t1))


@dataclass(frozen=True)
class Explanation:
    rule_index: int
    entities: tuple[int, ...]
    timestamps: tuple[int, ...]
    score: float


@dataclass
class ScoredCandidates:
    """Per-candidate ``(rule index, score)`` pairs collected by :func:`apply_rules`."""

    scores: dict[int, list[tuple[int, float]]] = field(default_factory=dict)
    explanations: dict[int, list[Explanation]] = field(default_factory=dict)
    rules_applied: int = 0

    def __len__(self) -> int:
        return len(self.scores)

    def add(self, candidate: int, rule_index: int, score: float) -> None:
        self.scores.setdefault(candidate, []).append((rule_index, score))


def apply_rules(view: SubgraphView, rules: Sequence[TemporalRule], query: Query, k: int = 20,
                a: float = 0.5, lam: float = 0.1, K: int | None = None,
                explain: bool = False) -> ScoredCandidates:
    """Apply ``rules`` in order until at least ``k`` distinct candidates are found.

    The stopping check runs only after a rule has been applied completely.
    """
    out = ScoredCandidates()
    for index, rule in enumerate(rules):
        g = find_body_groundings(view, rule, query.subject, K)
        out.rules_applied = index + 1
        if len(g):
            cand = g.candidates
            t1 = g.timestamps[:, 0]
            order = np.lexsort((t1, cand))
            cs = cand[order]
            last = order[np.r_[cs[1:] != cs[:-1], True]]
            scores = a * rule.confidence + (1.0 - a) * np.exp(-lam * (query.query_time - t1[last]))
            for row, score in zip(last, scores):
                c = int(cand[row])
                out.add(c, index, float(score))
                if explain:
                    out.explanations.setdefault(c, []).append(Explanation(
                        index, tuple(map(int, g.entities[row])), tuple(map(int, g.timestamps[row])),
                        float(score)))
        if len(out) >= k:
            break
    return out


def format_grounding(rule: TemporalRule, entities: Iterable[int], timestamps: Iterable[int],
                     vocab: Vocabulary) -> str:
    """Render a grounding as a dated edge sequence joined by ``&``."""
    ents = [vocab.entity_name(e) for e in entities]
    times = [vocab.decode_time(t) for t in timestamps]
    return " & ".join(
        format_atom(ents[i], vocab.relation_name(r), ents[i + 1], times[i])
        for i, r in enumerate(rule.body_relations)
    )
