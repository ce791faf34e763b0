"""Small synthetic temporal knowledge graphs for tests and demos."""

from __future__ import annotations

import numpy as np


def random_quadruples(n_entities: int = 30, n_relations: int = 4, n_facts: int = 300,
                      n_times: int = 20, seed: int = 0) -> list[tuple[str, str, str, str]]:
    """Uniformly random facts over ``e0..``, ``r0..`` and integer times ``0..n_times-1``."""
    rng = np.random.default_rng(seed)
    s = rng.integers(n_entities, size=n_facts)
    o = rng.integers(n_entities, size=n_facts)
    r = rng.integers(n_relations, size=n_facts)
    t = rng.integers(n_times, size=n_facts)
    return [(f"e{a}", f"r{b}", f"e{c}", str(d)) for a, b, c, d in zip(s, r, o, t)]


def causal_events(n_entities: int = 40, n_times: int = 120, n_seeds: int = 400,
                  follow_prob: float = 0.8, seed: int = 0) -> list[tuple[str, str, str, str]]:
    """Random events plus regular follow-up patterns that rules can pick up.

    * ``negotiate(x, y)`` at ``t`` is often followed by ``sign(x, y)`` one to
      three steps later;
    * ``threaten(x, y)`` is often answered by ``protest(y, x)`` in the next step;
    * ``visit(x, y)`` then ``host(y, x)`` the same day leads to ``cooperate(x, y)``
      a few steps on;
    * ``noise`` facts connect random pairs.
    """
    rng = np.random.default_rng(seed)
    facts = set()

    def pair():
        a, b = rng.choice(n_entities, size=2, replace=False)
        return f"country{a}", f"country{b}"

    horizon = n_times - 4
    for _ in range(n_seeds):
        x, y = pair()
        t = int(rng.integers(horizon))
        kind = rng.integers(4)
        if kind == 0:
            facts.add((x, "negotiate", y, t))
            if rng.random() < follow_prob:
                facts.add((x, "sign", y, t + int(rng.integers(1, 4))))
        elif kind == 1:
            facts.add((x, "threaten", y, t))
            if rng.random() < follow_prob:
                facts.add((y, "protest", x, t + 1))
        elif kind == 2:
            facts.add((x, "visit", y, t))
            facts.add((y, "host", x, t))
            if rng.random() < follow_prob:
                facts.add((x, "cooperate", y, t + int(rng.integers(1, 4))))
        else:
            facts.add((x, "noise", y, t))
    return [(s, r, o, str(t)) for s, r, o, t in sorted(facts, key=lambda f: (f[3], f))]


def split_by_time(quads, valid_from: int, test_from: int):
    """Split integer-timestamped quadruples into (train, valid, test) by time."""
    train = [q for q in quads if int(q[3]) < valid_from]
    valid = [q for q in quads if valid_from <= int(q[3]) < test_from]
    test = [q for q in quads if int(q[3]) >= test_from]
    return train, valid, test


def paired_graph(n_pairs: int = 10, history: int = 6, future: int = 2):
    """Entities matched in fixed pairs; ``talk`` is always followed by ``meet``.

    Train holds alternating ``talk``/``meet`` facts inside each pair; valid and
    test hold ``meet`` facts only.  Every forecast is implied uniquely, because
    walks from an entity can never leave its pair.
    """
    ents = [f"p{i}" for i in range(2 * n_pairs)]
    train, valid, test = [], [], []
    for i in range(n_pairs):
        a, b = ents[2 * i], ents[2 * i + 1]
        for t in range(0, history, 2):
            train.append((a, "talk", b, str(t)))
            train.append((a, "meet", b, str(t + 1)))
        for j in range(future):
            valid.append((a, "meet", b, str(history + j)))
            test.append((a, "meet", b, str(history + future + j)))
    return train, valid, test


def write_split(path, quads) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in quads:
            fh.write("\t".join(q) + "\n")
