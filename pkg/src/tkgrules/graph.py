"""Indexed, immutable temporal knowledge graph store.

Facts are quadruples ``(subject, relation, object, timestamp)``.  Every fact is
stored together with its inverse ``(object, relation + R, subject, timestamp)``
where ``R`` is the number of base relations, so walkers and joins can traverse
edges in both directions.

All lookups go through sorted composite integer keys, which turns time-bounded
neighbourhood queries into ``np.searchsorted`` calls and lets the samplers and
the rule applier work on whole batches of partial walks at once.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import EmptyDataset, MalformedLine, UnknownRelation, UnparsableTimestamp

INFINITE = math.inf
INVERSE_SUFFIX = "^-1"


class Edge(NamedTuple):
    subject: int
    relation: int
    object: int
    timestamp: int


def parse_quadruple(line: str, separator: str = "\t", line_number: int | None = None):
    """Split one line into ``(subject, relation, object, timestamp)`` strings.

    Columns after the fourth are ignored.
    """
    fields = line.rstrip("\r\n").split(separator)
    if len(fields) < 4:
        raise MalformedLine(line_number, line)
    return fields[0], fields[1], fields[2], fields[3]


def load_quadruples(path, separator: str = "\t") -> list[tuple[str, str, str, str]]:
    quads = []
    with open(path, encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            quads.append(parse_quadruple(line, separator, number))
    return quads


def _parse_times(raw: Iterable[str]):
    """Return ``(kind, origin)`` for a collection of raw timestamp strings."""
    raw = set(raw)
    try:
        values = [int(x) for x in raw]
    except ValueError:
        values = None
    if values is not None:
        if min(values) < 0:
            bad = min(values)
            raise UnparsableTimestamp(f"negative timestamp {bad}")
        return "int", min(values)
    dates = []
    for x in raw:
        try:
            dates.append(dt.date.fromisoformat(x.strip()))
        except ValueError:
            raise UnparsableTimestamp(f"cannot parse timestamp {x!r}") from None
    return "date", min(dates)


class Vocabulary:
    """Bidirectional string/id maps for entities, base relations and timestamps."""

    def __init__(self, entities: Sequence[str], relations: Sequence[str],
                 time_kind: str, time_origin, time_names: dict[int, str] | None = None):
        self.entities = list(entities)
        self.relations = list(relations)
        self._entity_ids = {name: i for i, name in enumerate(self.entities)}
        self._relation_ids = {name: i for i, name in enumerate(self.relations)}
        self.time_kind = time_kind
        self.time_origin = time_origin
        self._time_names = dict(time_names or {})

    @classmethod
    def from_quadruples(cls, quadruples) -> "Vocabulary":
        if not quadruples:
            raise EmptyDataset("no quadruples to build a vocabulary from")
        entities: dict[str, None] = {}
        relations: dict[str, None] = {}
        times: dict[str, None] = {}
        for s, r, o, t in quadruples:
            entities.setdefault(s)
            entities.setdefault(o)
            relations.setdefault(r)
            times.setdefault(t)
        kind, origin = _parse_times(times)
        vocab = cls(list(entities), list(relations), kind, origin)
        for raw in times:
            vocab._time_names.setdefault(vocab.encode_time(raw), raw)
        return vocab

    @property
    def num_entities(self) -> int:
        return len(self.entities)

    @property
    def num_base_relations(self) -> int:
        return len(self.relations)

    def entity_id(self, name: str) -> int:
        return self._entity_ids[name]

    def entity_name(self, entity: int) -> str:
        return self.entities[entity]

    def relation_id(self, name: str) -> int:
        """Resolve a relation name; names ending in ``^-1`` denote inverses."""
        if name in self._relation_ids:
            return self._relation_ids[name]
        if name.endswith(INVERSE_SUFFIX):
            base = name[: -len(INVERSE_SUFFIX)]
            if base in self._relation_ids:
                return self._relation_ids[base] + len(self.relations)
        raise UnknownRelation(name)

    def relation_name(self, relation: int) -> str:
        n = len(self.relations)
        if relation >= n:
            return self.relations[relation - n] + INVERSE_SUFFIX
        return self.relations[relation]

    def encode_time(self, raw: str) -> int:
        try:
            if self.time_kind == "int":
                value = int(raw) - self.time_origin
            else:
                value = (dt.date.fromisoformat(raw.strip()) - self.time_origin).days
        except ValueError:
            raise UnparsableTimestamp(f"cannot parse timestamp {raw!r}") from None
        if value < 0:
            raise UnparsableTimestamp(f"timestamp {raw!r} precedes the dataset origin")
        return value

    def decode_time(self, t: int) -> str:
        if t in self._time_names:
            return self._time_names[t]
        if self.time_kind == "int":
            return str(t + self.time_origin)
        return (self.time_origin + dt.timedelta(days=int(t))).isoformat()

    def encode(self, quadruples) -> np.ndarray:
        """Encode raw quadruples into an ``(n, 4)`` int64 array of base facts."""
        out = np.empty((len(quadruples), 4), dtype=np.int64)
        for i, (s, r, o, t) in enumerate(quadruples):
            out[i] = (self._entity_ids[s], self._relation_ids[r],
                      self._entity_ids[o], self.encode_time(t))
        return out


class TkgStore:
    """Immutable quadruple store with inverse augmentation and time-sorted indices.

    Edge arrays (``sub``, ``rel``, ``obj``, ``ts``) are kept in adjacency order,
    i.e. sorted by ``(subject, timestamp, relation, object)``.  Edge indices used
    anywhere in the package refer to positions in these arrays.
    """

    def __init__(self, vocab: Vocabulary, base_facts: np.ndarray):
        base_facts = np.asarray(base_facts, dtype=np.int64).reshape(-1, 4)
        if len(base_facts) == 0:
            raise EmptyDataset("store has no facts")
        self.vocab = vocab
        R = vocab.num_base_relations
        base = np.unique(base_facts, axis=0)
        s, r, o, t = base.T
        sub = np.concatenate([s, o])
        rel = np.concatenate([r, r + R])
        obj = np.concatenate([o, s])
        ts = np.concatenate([t, t])

        order = np.lexsort((obj, rel, ts, sub))
        self.sub = np.ascontiguousarray(sub[order])
        self.rel = np.ascontiguousarray(rel[order])
        self.obj = np.ascontiguousarray(obj[order])
        self.ts = np.ascontiguousarray(ts[order])
        for a in (self.sub, self.rel, self.obj, self.ts):
            a.flags.writeable = False

        self.num_base_facts = len(base)
        E = self.num_entities
        NR = self.num_relations
        self._T1 = int(self.ts.max()) + 1

        self._adj_offsets = np.searchsorted(self.sub, np.arange(E + 1))
        self._adj_key = self.sub * self._T1 + self.ts

        srt = np.lexsort((self.obj, self.ts, self.rel, self.sub))
        self._srt_perm = srt
        self._srt_key = ((self.sub[srt] * NR + self.rel[srt]) * self._T1 + self.ts[srt])

        by_rel = np.lexsort((self.obj, self.ts, self.sub, self.rel))
        self._rel_perm = by_rel
        self._rel_offsets = np.searchsorted(self.rel[by_rel], np.arange(NR + 1))

        key3 = (self.sub * NR + self.rel) * E + self.obj
        o3 = np.lexsort((self.ts, key3))
        k3 = key3[o3]
        starts = np.flatnonzero(np.r_[True, k3[1:] != k3[:-1]])
        self._triple_keys = k3[starts]
        ends = np.r_[starts[1:], len(k3)] - 1
        self._triple_max_ts = self.ts[o3][ends]

        self._ts_sorted = np.sort(self.ts)
        self.timestamps = np.unique(self.ts)

    # -- sizes ----------------------------------------------------------------
    @property
    def num_entities(self) -> int:
        return self.vocab.num_entities

    @property
    def num_base_relations(self) -> int:
        return self.vocab.num_base_relations

    @property
    def num_relations(self) -> int:
        return 2 * self.vocab.num_base_relations

    @property
    def num_timestamps(self) -> int:
        return len(self.timestamps)

    @property
    def min_timestamp(self) -> int:
        return int(self._ts_sorted[0])

    @property
    def max_timestamp(self) -> int:
        return int(self._ts_sorted[-1])

    def __len__(self) -> int:
        return len(self.sub)

    def __repr__(self) -> str:
        return (f"TkgStore(facts={self.num_base_facts}, entities={self.num_entities}, "
                f"relations={self.num_base_relations}, timestamps={self.num_timestamps})")

    # -- ids ------------------------------------------------------------------
    def inverse(self, relation: int) -> int:
        R = self.num_base_relations
        return relation - R if relation >= R else relation + R

    def is_inverse(self, relation: int) -> bool:
        return relation >= self.num_base_relations

    def edge(self, i: int) -> Edge:
        return Edge(int(self.sub[i]), int(self.rel[i]), int(self.obj[i]), int(self.ts[i]))

    def edges(self) -> Iterator[Edge]:
        for i in range(len(self.sub)):
            yield self.edge(i)

    def present_relations(self) -> list[int]:
        counts = np.diff(self._rel_offsets)
        return [int(r) for r in np.flatnonzero(counts)]

    def relation_edges(self, relation: int) -> np.ndarray:
        """Indices of all edges with ``relation``, ordered by (subject, time)."""
        if not 0 <= relation < self.num_relations:
            return self._rel_perm[:0]
        return self._rel_perm[self._rel_offsets[relation]:self._rel_offsets[relation + 1]]

    # -- time-bounded neighbourhoods -------------------------------------------
    def _clamp(self, t):
        return np.clip(t, 0, self._T1)

    def adjacency_range(self, node: int, t_lo: int = 0, t_hi: float = INFINITE) -> tuple[int, int]:
        """Index range of ``node``'s outgoing edges with ``t_lo <= t < t_hi``."""
        base = node * self._T1
        hi = self._T1 if t_hi == INFINITE else int(self._clamp(t_hi))
        lo = int(self._clamp(t_lo))
        start = int(np.searchsorted(self._adj_key, base + lo, side="left"))
        end = int(np.searchsorted(self._adj_key, base + hi, side="left"))
        return start, max(start, end)

    def relation_ranges(self, nodes: np.ndarray, relation: int, t_lo, t_hi):
        """Vectorised ``[start, end)`` positions into the (subject, relation, time) index.

        For each node, covers edges ``(node, relation, *, t)`` with
        ``t_lo <= t < t_hi``; ``t_lo``/``t_hi`` may be scalars or arrays.
        """
        nodes = np.asarray(nodes, dtype=np.int64)
        group = (nodes * self.num_relations + relation) * self._T1
        lo = self._clamp(np.asarray(t_lo, dtype=np.int64))
        if np.isscalar(t_hi) and t_hi == INFINITE:
            hi = self._T1
        else:
            hi = self._clamp(np.asarray(t_hi, dtype=np.int64))
        start = np.searchsorted(self._srt_key, group + lo, side="left")
        end = np.searchsorted(self._srt_key, group + hi, side="left")
        return start, np.maximum(start, end)

    def expand(self, nodes: np.ndarray, relation: int, t_lo, t_hi=INFINITE):
        """All continuations of a batch of partial walks by one relation.

        Returns ``(rows, edges)``: ``rows[j]`` is the index into ``nodes`` that
        edge ``edges[j]`` extends.  Edges of one row are in time order.
        """
        if not 0 <= relation < self.num_relations:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty
        start, end = self.relation_ranges(nodes, relation, t_lo, t_hi)
        counts = end - start
        total = int(counts.sum())
        rows = np.repeat(np.arange(len(counts)), counts)
        offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        return rows, self._srt_perm[start[rows] + offsets]

    def sample_expand(self, nodes: np.ndarray, relation: int, t_lo, rng: np.random.Generator):
        """Pick one uniform continuation per partial walk; -1 where none exists."""
        if not 0 <= relation < self.num_relations:
            return np.full(len(nodes), -1, dtype=np.int64)
        start, end = self.relation_ranges(nodes, relation, t_lo, INFINITE)
        counts = end - start
        pick = start + np.floor(rng.random(len(nodes)) * counts).astype(np.int64)
        found = counts > 0
        out = np.full(len(nodes), -1, dtype=np.int64)
        out[found] = self._srt_perm[pick[found]]
        return out

    def head_exists_after(self, subjects, relation: int, objects, after_t) -> np.ndarray:
        """Whether ``(s, relation, o, t)`` is stored for some ``t > after_t``, per row."""
        subjects = np.asarray(subjects, dtype=np.int64)
        objects = np.asarray(objects, dtype=np.int64)
        key = (subjects * self.num_relations + relation) * self.num_entities + objects
        pos = np.searchsorted(self._triple_keys, key)
        pos_c = np.minimum(pos, len(self._triple_keys) - 1)
        hit = self._triple_keys[pos_c] == key
        return hit & (self._triple_max_ts[pos_c] > np.asarray(after_t))

    def objects_at(self, subject: int, relation: int, t: int) -> np.ndarray:
        """Objects ``o`` with ``(subject, relation, o, t)`` stored."""
        start, end = self.relation_ranges(np.array([subject]), relation, t, t + 1)
        return self.obj[self._srt_perm[start[0]:end[0]]]

    def count_in_window(self, lo: int, hi: float) -> int:
        a = np.searchsorted(self._ts_sorted, lo, side="left")
        b = len(self._ts_sorted) if hi == INFINITE else np.searchsorted(self._ts_sorted, hi, side="left")
        return int(max(0, b - a))

    def object_counts(self, relation: int | None = None) -> np.ndarray:
        """Occurrence counts of each entity as object (of ``relation`` if given)."""
        if relation is None:
            objs = self.obj[self.rel < self.num_base_relations]
        else:
            objs = self.obj[self.relation_edges(relation)]
        return np.bincount(objs, minlength=self.num_entities)

    def stats(self) -> dict[str, int]:
        return {
            "facts": self.num_base_facts,
            "entities": int(len(np.unique(self.sub))),
            "relations": int(len(np.unique(self.rel[self.rel < self.num_base_relations]))),
            "timestamps": self.num_timestamps,
        }


def build_store(quadruples, vocab: Vocabulary | None = None) -> TkgStore:
    """Intern, deduplicate and inverse-augment raw string quadruples."""
    if not quadruples:
        raise EmptyDataset("no quadruples given")
    if vocab is None:
        vocab = Vocabulary.from_quadruples(quadruples)
    return TkgStore(vocab, vocab.encode(quadruples))


@dataclass(frozen=True)
class SubgraphView:
    """Edges of ``base`` restricted to the half-open time interval ``[lo, hi)``."""

    base: TkgStore
    lo: int
    hi: float

    def __len__(self) -> int:
        return self.base.count_in_window(self.lo, self.hi)

    def contains(self, t: int) -> bool:
        return self.lo <= t < self.hi

    def edges(self) -> Iterator[Edge]:
        for e in self.base.edges():
            if self.contains(e.timestamp):
                yield e


def window_subgraph(store: TkgStore, query_time: int, w: float = INFINITE) -> SubgraphView:
    """View over ``[max(0, query_time - w), query_time)``; all history if ``w`` is infinite."""
    if query_time < 0:
        raise ValueError("query_time must be non-negative")
    lo = 0 if w == INFINITE else max(0, int(query_time - w))
    return SubgraphView(store, lo, int(query_time))


def _as_view(graph) -> SubgraphView:
    if isinstance(graph, SubgraphView):
        return graph
    return SubgraphView(graph, 0, INFINITE)


def edges_from(graph, node: int, relation: int | None = None, t_bound: float = INFINITE,
               strict: bool = True) -> list[Edge]:
    """Outgoing edges of ``node`` before ``t_bound`` (``<`` if strict, else ``<=``).

    ``graph`` is a :class:`TkgStore` or a :class:`SubgraphView`; results are in
    ascending time order.
    """
    view = _as_view(graph)
    store = view.base
    if t_bound == INFINITE:
        hi = view.hi
    else:
        hi = min(view.hi, t_bound if strict else t_bound + 1)
    if relation is None:
        start, end = store.adjacency_range(node, view.lo, hi)
        idx = range(start, end)
    else:
        rows, idx = store.expand(np.array([node]), relation, view.lo, hi)
    return [store.edge(i) for i in idx]


@dataclass
class Dataset:
    """Train/valid/test splits interned against one shared vocabulary."""

    vocab: Vocabulary
    train: TkgStore
    valid: TkgStore | None
    test: TkgStore | None
    graph: TkgStore
    raw_counts: dict[str, int]
    name: str = ""

    def split(self, name: str) -> TkgStore:
        store = getattr(self, name)
        if store is None:
            raise EmptyDataset(f"split {name!r} was not loaded")
        return store


def dataset_from_quadruples(train, valid=None, test=None, name: str = "") -> Dataset:
    """Build a :class:`Dataset` from in-memory quadruple lists (``None`` = split absent)."""
    raw = {"train": train, "valid": valid, "test": test}
    for k, quads in raw.items():
        if quads is not None and not quads:
            raise EmptyDataset(f"{k} split contains no facts")
    everything = [q for quads in raw.values() if quads for q in quads]
    vocab = Vocabulary.from_quadruples(everything)
    stores = {k: (build_store(q, vocab) if q else None) for k, q in raw.items()}
    return Dataset(
        vocab=vocab,
        train=stores["train"],
        valid=stores["valid"],
        test=stores["test"],
        graph=build_store(everything, vocab),
        raw_counts={k: len(q) for k, q in raw.items() if q is not None},
        name=name,
    )


def load_dataset(train, valid=None, test=None, separator: str = "\t", name: str = "") -> Dataset:
    paths = {"train": train, "valid": valid, "test": test}
    raw = {k: load_quadruples(p, separator) if p is not None else None for k, p in paths.items()}
    for k, quads in raw.items():
        if quads is not None and not quads:
            raise EmptyDataset(f"{k} split {paths[k]} contains no facts")
    return dataset_from_quadruples(raw["train"], raw["valid"], raw["test"],
                                   name or Path(train).parent.name)


def load_dataset_dir(directory, separator: str = "\t") -> Dataset:
    d = Path(directory)
    def opt(fname):
        p = d / fname
        return p if p.exists() else None
    return load_dataset(d / "train.txt", opt("valid.txt"), opt("test.txt"), separator, name=d.name)
