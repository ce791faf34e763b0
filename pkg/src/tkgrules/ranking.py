"""Noisy-OR candidate ranking, fallback baseline and time-aware filtered evaluation."""

from __future__ import annotations

import csv
import enum
import io
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _parallel
from .applier import Query, ScoredCandidates, apply_rules
from .errors import TruthOutOfUniverse
from .graph import INFINITE, TkgStore, window_subgraph
from .rules import RuleSet

logger = logging.getLogger(__name__)


class Provenance(str, enum.Enum):
    RULES = "rules"
    BASELINE = "baseline"


class TiePolicy(str, enum.Enum):
    BEST = "best"
    AVERAGE = "average"
    WORST = "worst"


@dataclass
class RankedAnswer:
    """Candidates by decreasing score (ties by entity id).

    ``excluded`` lists entities removed from the ranking universe by filtering.
    """

    entries: list[tuple[int, float]]
    provenance: Provenance = Provenance.RULES
    excluded: frozenset = frozenset()

    def score_map(self) -> dict[int, float]:
        return dict(self.entries)

    def entities(self) -> list[int]:
        return [e for e, _ in self.entries]


def noisy_or(scores: Iterable[float]) -> float:
    """``1 - prod(1 - s)``, accumulated as ``acc + (1 - acc) * s`` over the sorted scores.

    The running form keeps a single score and an absorbing 1.0 exact, and
    sorting makes the result independent of the input order.
    """
    acc = 0.0
    for s in sorted(scores):
        acc += (1.0 - acc) * s
    return acc


def _ranked(scores: dict[int, float], provenance: Provenance) -> RankedAnswer:
    return RankedAnswer(sorted(scores.items(), key=lambda kv: (-kv[1], kv[0])), provenance)


def aggregate(scored: ScoredCandidates) -> RankedAnswer:
    return _ranked({c: noisy_or(s for _, s in pairs) for c, pairs in scored.scores.items()},
                   Provenance.RULES)


def baseline_distribution(store: TkgStore, relation: int | None = None) -> RankedAnswer:
    """Rank entities by how often they occur as objects in ``store``.

    Counts edges of ``relation`` when it occurs in ``store``; otherwise, or when
    ``relation`` is None, counts objects of all base facts.
    """
    counts = None
    if relation is not None and len(store.relation_edges(relation)):
        counts = store.object_counts(relation)
    if counts is None:
        counts = store.object_counts()
    total = counts.sum()
    nz = np.flatnonzero(counts)
    return _ranked({int(e): counts[e] / total for e in nz}, Provenance.BASELINE)


def rank_of_answer(ranked: RankedAnswer, truth: int, universe: int,
                   tie_policy: TiePolicy = TiePolicy.AVERAGE) -> float:
    """Rank of ``truth`` among ``universe`` entities; unranked entities score 0.

    Ties are resolved by ``tie_policy``: optimistic, expected (mean position)
    or pessimistic.
    """
    if not 0 <= truth < universe:
        raise TruthOutOfUniverse(f"entity {truth} outside universe of size {universe}")
    scores = ranked.score_map()
    s = scores.get(truth, 0.0)
    vals = np.fromiter(scores.values(), dtype=float, count=len(scores))
    greater = int((vals > s).sum())
    ties = int((vals == s).sum())
    if s == 0.0:
        ties += universe - len(ranked.excluded - scores.keys()) - len(scores)
    policy = TiePolicy(tie_policy)
    if policy is TiePolicy.BEST:
        return float(greater + 1)
    if policy is TiePolicy.WORST:
        return float(greater + ties)
    return greater + (ties + 1) / 2


def _co_true(query: Query, known_facts) -> set[int]:
    if isinstance(known_facts, TkgStore):
        return set(map(int, known_facts.objects_at(query.subject, query.relation, query.query_time)))
    return {o for (s, r, o, t) in known_facts
            if s == query.subject and r == query.relation and t == query.query_time}


def time_aware_filter(ranked: RankedAnswer, query: Query, truth: int, known_facts) -> RankedAnswer:
    """Drop other entities that are true answers at exactly the query timestamp.

    ``known_facts`` is a :class:`TkgStore` over all splits, or a collection of
    ``(s, r, o, t)`` tuples that includes inverse facts.
    """
    removed = _co_true(query, known_facts) - {truth}
    if not removed:
        return ranked
    entries = [(e, s) for e, s in ranked.entries if e not in removed]
    return RankedAnswer(entries, ranked.provenance, ranked.excluded | frozenset(removed))


@dataclass(frozen=True)
class ApplyParams:
    window: float = INFINITE
    k: int = 20
    a: float = 0.5
    lam: float = 0.1
    K: int | None = None
    tie_policy: TiePolicy = TiePolicy.AVERAGE


@dataclass(frozen=True)
class QueryRecord:
    subject: int
    relation: int
    truth: int
    query_time: int
    direction: str
    rank: float
    filtered_rank: float
    provenance: Provenance
    reason: str
    num_candidates: int


METRIC_NAMES = ("MRR", "h@1", "h@3", "h@10")


def metrics(ranks) -> dict[str, float]:
    r = np.asarray(ranks, dtype=float)
    if len(r) == 0:
        return dict.fromkeys(METRIC_NAMES, 0.0)
    return {"MRR": float(np.mean(1.0 / r)), "h@1": float(np.mean(r <= 1)),
            "h@3": float(np.mean(r <= 3)), "h@10": float(np.mean(r <= 10))}


@dataclass
class EvalReport:
    records: list[QueryRecord]
    params: ApplyParams = field(default_factory=ApplyParams)
    runtime: float = 0.0

    @property
    def filtered(self) -> dict[str, float]:
        return metrics([r.filtered_rank for r in self.records])

    @property
    def raw(self) -> dict[str, float]:
        return metrics([r.rank for r in self.records])

    @property
    def mrr(self) -> float:
        return self.filtered["MRR"]

    def reason_counts(self) -> dict[str, int]:
        return dict(Counter(r.reason for r in self.records))

    def format_table(self) -> str:
        lines = ["setting   " + "".join(f"{m:>8}" for m in METRIC_NAMES)]
        for name, vals in (("raw", self.raw), ("filtered", self.filtered)):
            lines.append(f"{name:<10}" + "".join(f"{vals[m]:>8.4f}" for m in METRIC_NAMES))
        counts = self.reason_counts()
        n = len(self.records)
        lines.append(f"queries {n}; baseline: no rules {counts.get('no_rules', 0)}, "
                     f"no groundings {counts.get('no_groundings', 0)}")
        return "\n".join(lines) + "\n"

    def to_csv(self, vocab=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["subject", "relation", "truth", "timestamp", "direction", "rank",
                    "filtered_rank", "provenance", "reason", "num_candidates"])
        for r in self.records:
            if vocab is not None:
                names = (vocab.entity_name(r.subject), vocab.relation_name(r.relation),
                         vocab.entity_name(r.truth), vocab.decode_time(r.query_time))
            else:
                names = (r.subject, r.relation, r.truth, r.query_time)
            w.writerow([*names, r.direction, repr(r.rank), repr(r.filtered_rank),
                        r.provenance.value, r.reason, r.num_candidates])
        return buf.getvalue()


@dataclass
class _EvalContext:
    train: TkgStore
    rules: RuleSet
    graph: TkgStore
    known: object
    params: ApplyParams


def answer_query(ctx: _EvalContext, query: Query, view=None):
    """Rank candidates for one query; falls back to the baseline when rules give nothing."""
    p = ctx.params
    if view is None:
        view = window_subgraph(ctx.graph, query.query_time, p.window)
    rules = ctx.rules.for_relation(query.relation)
    if not rules:
        return baseline_distribution(ctx.train, query.relation), "no_rules", None
    scored = apply_rules(view, rules, query, p.k, p.a, p.lam, p.K)
    if len(scored) == 0:
        return baseline_distribution(ctx.train, query.relation), "no_groundings", scored
    return aggregate(scored), "rules", scored


def _eval_chunk(ctx: _EvalContext, chunk):
    out = []
    universe = ctx.graph.num_entities
    view = None
    for query, truth, direction in chunk:
        if view is None or view.hi != query.query_time:
            view = window_subgraph(ctx.graph, query.query_time, ctx.params.window)
        ranked, reason, _ = answer_query(ctx, query, view)
        raw = rank_of_answer(ranked, truth, universe, ctx.params.tie_policy)
        filtered = rank_of_answer(time_aware_filter(ranked, query, truth, ctx.known), truth,
                                  universe, ctx.params.tie_policy)
        out.append(QueryRecord(query.subject, query.relation, truth, query.query_time, direction,
                               raw, filtered, ranked.provenance, reason, len(ranked.entries)))
    return out


def eval_queries(store: TkgStore) -> list[tuple[Query, int, str]]:
    """Object and subject prediction queries for every base fact, in time order."""
    base = store.rel < store.num_base_relations
    s, r, o, t = store.sub[base], store.rel[base], store.obj[base], store.ts[base]
    order = np.lexsort((o, r, s, t))
    out = []
    for i in order:
        si, ri, oi, ti = int(s[i]), int(r[i]), int(o[i]), int(t[i])
        out.append((Query(si, ri, ti), oi, "object"))
        out.append((Query(oi, store.inverse(ri), ti), si, "subject"))
    return out


def evaluate(train: TkgStore, rules: RuleSet, eval_store: TkgStore, params: ApplyParams = ApplyParams(),
             graph: TkgStore | None = None, known_facts=None, workers: int = 1) -> EvalReport:
    """Time-aware filtered evaluation of ``rules`` on every fact of ``eval_store``.

    ``graph`` supplies the history that rule bodies are matched against (only
    facts strictly before each query time are visible); it defaults to
    ``train``.  ``known_facts`` drives the filter and defaults to ``graph``.
    All stores must share one vocabulary.
    """
    graph = train if graph is None else graph
    known_facts = graph if known_facts is None else known_facts
    ctx = _EvalContext(train, rules, graph, known_facts, params)
    queries = eval_queries(eval_store)
    chunks: list[list] = []
    for q in queries:
        if not chunks or chunks[-1][-1][0].query_time != q[0].query_time:
            chunks.append([])
        chunks[-1].append(q)
    started = time.perf_counter()
    parts = _parallel.run_tasks(_eval_chunk, ctx, chunks, workers, chunksize=1)
    records = [rec for part in parts for rec in part]
    report = EvalReport(records, params, time.perf_counter() - started)
    counts = report.reason_counts()
    logger.info("evaluated %d queries in %.1fs; baseline used for %d (no rules) + %d (no groundings)",
                len(records), report.runtime, counts.get("no_rules", 0), counts.get("no_groundings", 0))
    return report
