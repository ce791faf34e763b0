"""Temporal logical rules: lifting walks, confidence estimation and rule sets."""

from __future__ import annotations

import enum
import json
import logging
import time
import warnings
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Iterable, Iterator

import numpy as np

from . import _parallel
from .errors import UnknownRelation
from .graph import TkgStore, Vocabulary
from .walks import Distribution, TemporalWalk, sample_temporal_walk

logger = logging.getLogger(__name__)


class ConfidenceMode(str, enum.Enum):
    SAMPLED = "sampled"
    EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class TemporalRule:
    """``(E1, head, E_{l+1}, T_{l+1}) <- AND_i (E_i, body[i], E_{i+1}, T_i)``.

    ``var_pattern[i]`` is the variable id bound to ``E_{i+1}``; positions that
    share an id must be grounded by the same entity.  Body timestamps are
    non-decreasing and strictly before the head timestamp.
    """

    head_relation: int
    body_relations: tuple[int, ...]
    var_pattern: tuple[int, ...]
    confidence: float = 0.0
    rule_support: int = 0
    body_support: int = 0

    @property
    def length(self) -> int:
        return len(self.body_relations)

    @property
    def key(self) -> tuple:
        return (self.head_relation, self.body_relations, self.var_pattern)

    def with_supports(self, rule_support: int, body_support: int) -> "TemporalRule":
        conf = rule_support / body_support if body_support else 0.0
        return replace(self, rule_support=int(rule_support), body_support=int(body_support),
                       confidence=conf)


def rule_sort_key(rule: TemporalRule):
    return (-rule.confidence, -rule.body_support, rule.length, rule.body_relations, rule.var_pattern)


def _pattern(entities) -> tuple[int, ...]:
    ids: dict[int, int] = {}
    return tuple(ids.setdefault(e, len(ids)) for e in entities)


def walk_body_grounding(walk: TemporalWalk) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Entities ``E1..E_{l+1}`` and timestamps ``T1..T_l`` the walk binds in its rule."""
    body = walk.body_edges
    entities = (body[-1].object,) + tuple(e.subject for e in reversed(body))
    times = tuple(e.timestamp for e in reversed(body))
    return entities, times


def lift_walk_to_rule(walk: TemporalWalk, store: TkgStore) -> TemporalRule:
    """Turn a walk into a rule by reversing the body and inverting its relations."""
    entities, _ = walk_body_grounding(walk)
    body = tuple(store.inverse(e.relation) for e in reversed(walk.body_edges))
    return TemporalRule(walk.head_edge.relation, body, _pattern(entities))


# -- body groundings ----------------------------------------------------------

def _pattern_ok(entities: np.ndarray, pattern: tuple[int, ...]) -> np.ndarray:
    ok = np.ones(len(entities), dtype=bool)
    first: dict[int, int] = {}
    for pos, var in enumerate(pattern):
        if var in first:
            ok &= entities[:, pos] == entities[:, first[var]]
        else:
            first[var] = pos
    return ok


def sample_bodies(store: TkgStore, rule: TemporalRule, b: int, rng: np.random.Generator):
    """Forward-sample ``b`` body grounding attempts; return the successful ones.

    Returns ``(entities, timestamps)`` arrays of shape ``(k, l+1)`` and ``(k, l)``,
    possibly with repeated rows.
    """
    l = rule.length
    first = store.relation_edges(rule.body_relations[0])
    if len(first) == 0:
        return np.zeros((0, l + 1), np.int64), np.zeros((0, l), np.int64)
    pick = first[rng.integers(len(first), size=b)]
    ents = [store.sub[pick], store.obj[pick]]
    times = [store.ts[pick]]
    alive = np.ones(b, dtype=bool)
    for rel in rule.body_relations[1:]:
        nxt = store.sample_expand(ents[-1], rel, times[-1], rng)
        alive &= nxt >= 0
        safe = np.where(nxt >= 0, nxt, 0)
        ents.append(np.where(alive, store.obj[safe], -1))
        times.append(np.where(alive, store.ts[safe], -1))
    E = np.stack(ents, axis=1)[alive]
    T = np.stack(times, axis=1)[alive]
    keep = _pattern_ok(E, rule.var_pattern)
    return E[keep], T[keep]


def enumerate_bodies(store: TkgStore, rule: TemporalRule):
    """Every body grounding of ``rule`` in ``store`` (exhaustive join)."""
    first = store.relation_edges(rule.body_relations[0])
    E = np.stack([store.sub[first], store.obj[first]], axis=1)
    T = store.ts[first][:, None]
    for rel in rule.body_relations[1:]:
        rows, idx = store.expand(E[:, -1], rel, T[:, -1])
        E = np.column_stack([E[rows], store.obj[idx]])
        T = np.column_stack([T[rows], store.ts[idx]])
    keep = _pattern_ok(E, rule.var_pattern)
    return E[keep], T[keep]


def _supports(store: TkgStore, rule: TemporalRule, E: np.ndarray, T: np.ndarray) -> tuple[int, int]:
    if len(E) == 0:
        return 0, 0
    unique = np.unique(np.column_stack([E, T]), axis=0)
    l = rule.length
    heads = store.head_exists_after(unique[:, 0], rule.head_relation, unique[:, l], unique[:, -1])
    return int(heads.sum()), len(unique)


def estimate_confidence(store: TkgStore, rule: TemporalRule, b: int = 500,
                        mode: ConfidenceMode = ConfidenceMode.SAMPLED,
                        rng: np.random.Generator | None = None) -> tuple[int, int, float]:
    """Return ``(rule_support, body_support, confidence)`` for ``rule`` on ``store``.

    Body support counts unique body groundings ``(e_1..e_{l+1}, t_1..t_l)``;
    rule support counts those with a head edge ``(e_1, head, e_{l+1}, t)`` at
    some ``t > t_l``.  In sampled mode only the bodies hit by ``b`` forward
    sampling attempts are counted.
    """
    mode = ConfidenceMode(mode)
    if mode is ConfidenceMode.EXHAUSTIVE:
        E, T = enumerate_bodies(store, rule)
    else:
        if b < 1:
            raise ValueError("sample budget b must be >= 1")
        if rng is None:
            rng = np.random.default_rng()
        E, T = sample_bodies(store, rule, b, rng)
    rs, bs = _supports(store, rule, E, T)
    return rs, bs, (rs / bs if bs else 0.0)


# -- rule sets ----------------------------------------------------------------

class RuleSet:
    """Rules grouped by head relation, each group in decreasing confidence."""

    def __init__(self, rules: Iterable[TemporalRule] = (), skipped: int = 0):
        groups: dict[int, list[TemporalRule]] = defaultdict(list)
        for rule in rules:
            groups[rule.head_relation].append(rule)
        self._groups = {h: sorted(g, key=rule_sort_key) for h, g in sorted(groups.items())}
        self.skipped = skipped

    def for_relation(self, relation: int) -> list[TemporalRule]:
        return self._groups.get(relation, [])

    def heads(self) -> list[int]:
        return list(self._groups)

    def __iter__(self) -> Iterator[TemporalRule]:
        for group in self._groups.values():
            yield from group

    def __len__(self) -> int:
        return sum(len(g) for g in self._groups.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, RuleSet) and self._groups == other._groups

    def __repr__(self) -> str:
        return f"RuleSet({len(self)} rules, {len(self._groups)} head relations)"

    def count_by_length(self) -> dict[int, int]:
        counts: dict[int, int] = defaultdict(int)
        for rule in self:
            counts[rule.length] += 1
        return dict(sorted(counts.items()))

    def restrict_lengths(self, lengths) -> "RuleSet":
        lengths = set(lengths)
        return RuleSet((r for r in self if r.length in lengths), self.skipped)


def filter_rules(rs: RuleSet, min_conf: float = 0.01, min_body_support: int = 2) -> RuleSet:
    return RuleSet((r for r in rs if r.confidence >= min_conf and r.body_support >= min_body_support),
                   rs.skipped)


# -- learning -----------------------------------------------------------------

def walk_rng(seed: int, relation: int, length: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, 0, relation, length, index])


def confidence_rng(seed: int, rule: TemporalRule) -> np.random.Generator:
    return np.random.default_rng([seed, 1, rule.head_relation, *rule.body_relations, *rule.var_pattern])


def _learn_task(store: TkgStore, task):
    relation, length, n, dist, seed, b, mode = task
    if len(store.relation_edges(relation)) == 0:
        return relation, length, 0, []
    found: dict[tuple, TemporalRule] = {}
    successes = 0
    for i in range(n):
        walk = sample_temporal_walk(store, relation, length, dist, walk_rng(seed, relation, length, i))
        if walk is None:
            continue
        successes += 1
        rule = lift_walk_to_rule(walk, store)
        found.setdefault(rule.key, rule)
    rules = []
    for rule in found.values():
        rs, bs, _ = estimate_confidence(store, rule, b, mode, confidence_rng(seed, rule))
        rules.append(rule.with_supports(rs, bs))
    return relation, length, successes, rules


def learn_rules(store: TkgStore, relations: Iterable[int] | None = None, lengths=(1, 2, 3),
                n: int = 200, dist: Distribution = Distribution.EXPONENTIAL, seed: int = 12,
                b: int = 500, mode: ConfidenceMode = ConfidenceMode.SAMPLED,
                workers: int = 1) -> RuleSet:
    """Sample ``n`` walk attempts per (relation, length), lift and score the rules.

    Dead-end walks use up an attempt.  Every (relation, length, attempt) and
    every rule draws from its own seed-derived random stream, so the result
    does not depend on ``workers``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if relations is None:
        relations = store.present_relations()
    dist = Distribution(dist)
    mode = ConfidenceMode(mode)
    tasks = [(int(r), int(l), n, dist, seed, b, mode) for r in relations for l in sorted(set(lengths))]
    started = time.perf_counter()
    results = _parallel.run_tasks(_learn_task, store, tasks, workers)
    rules = []
    for relation, length, successes, found in results:
        logger.debug("relation %d length %d: %d/%d walks succeeded, %d rules",
                     relation, length, successes, n, len(found))
        rules.extend(found)
    rs = RuleSet(rules)
    total_success = sum(r[2] for r in results)
    logger.info("learned %d rules %s from %d/%d successful walks in %.1fs",
                len(rs), rs.count_by_length(), total_success, n * len(tasks),
                time.perf_counter() - started)
    return rs


# -- serialisation ------------------------------------------------------------

def _record(rule: TemporalRule, vocab: Vocabulary) -> dict:
    return {
        "head": vocab.relation_name(rule.head_relation),
        "body": [vocab.relation_name(r) for r in rule.body_relations],
        "var_pattern": list(rule.var_pattern),
        "confidence": rule.confidence,
        "rule_support": rule.rule_support,
        "body_support": rule.body_support,
    }


def serialize_rules(rs: RuleSet, vocab: Vocabulary) -> str:
    """One JSON object per line; relations are referenced by name."""
    return "".join(json.dumps(_record(r, vocab), ensure_ascii=False) + "\n" for r in rs)


def deserialize_rules(text, vocab: Vocabulary) -> RuleSet:
    """Parse rule records, resolving relation names against ``vocab``.

    Records naming a relation missing from ``vocab`` are skipped with a warning;
    the number skipped is available as ``RuleSet.skipped``.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    rules = []
    skipped = 0
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        rec = json.loads(line)
        try:
            head = vocab.relation_id(rec["head"])
            body = tuple(vocab.relation_id(name) for name in rec["body"])
        except UnknownRelation as exc:
            skipped += 1
            warnings.warn(f"rule line {number}: unknown relation {exc.args[0]!r}, skipped",
                          stacklevel=2)
            continue
        rules.append(TemporalRule(head, body, tuple(rec["var_pattern"]), float(rec["confidence"]),
                                  int(rec["rule_support"]), int(rec["body_support"])))
    return RuleSet(rules, skipped=skipped)


def save_rules(path, rs: RuleSet, vocab: Vocabulary) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_rules(rs, vocab))


def load_rules(path, vocab: Vocabulary) -> RuleSet:
    with open(path, encoding="utf-8") as fh:
        return deserialize_rules(fh.read(), vocab)


def format_atom(subject: str, relation: str, obj: str, t: str) -> str:
    return f"({subject}, {relation}, {obj}, {t})"


def format_rule_human(rule: TemporalRule, vocab: Vocabulary) -> str:
    """Render e.g. ``0.818: (E1, share information, E2, T2) <- (E1, ..., E2, T1)``."""
    var = [f"E{v + 1}" for v in rule.var_pattern]
    l = rule.length
    head = format_atom(var[0], vocab.relation_name(rule.head_relation), var[l], f"T{l + 1}")
    body = " & ".join(
        format_atom(var[i], vocab.relation_name(r), var[i + 1], f"T{i + 1}")
        for i, r in enumerate(rule.body_relations)
    )
    return f"{rule.confidence:.3f}: {head} <- {body}"
