"""Command-line entry point: ``tkgrules {stats,learn,eval,apply}``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import _parallel
from .applier import Query, apply_rules, format_grounding
from .errors import ConfigError, TkgError
from .graph import INFINITE, load_dataset, window_subgraph
from .ranking import ApplyParams, TiePolicy, aggregate, evaluate
from .rules import (ConfidenceMode, filter_rules, format_rule_human, learn_rules, load_rules,
                    save_rules)
from .walks import Distribution

logger = logging.getLogger("tkgrules")

# memory-driven window defaults for the larger ICEWS subsets
DATASET_WINDOWS = {"icews18": 200, "icews0515": 1000}


@dataclass
class RunConfig:
    train: str | None = None
    valid: str | None = None
    test: str | None = None
    dataset: str | None = None
    separator: str = "\t"
    walks: int = 200
    lengths: list[int] = field(default_factory=lambda: [1, 2, 3])
    distribution: str = "exp"
    body_samples: int = 500
    min_conf: float = 0.01
    min_body_support: int = 2
    window: float | None = None
    k: int = 20
    alpha: float = 0.5
    lam: float = 0.1
    cap: int | None = None
    seed: int = 12
    workers: int | None = None
    tie_policy: str = "average"
    explain: bool = False
    strict_train_only: bool = False
    exhaustive_confidence: bool = False

    def validate(self) -> "RunConfig":
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)
        need(self.walks >= 1, "walks must be >= 1")
        need(len(self.lengths) > 0 and all(int(l) >= 1 for l in self.lengths), "lengths must be >= 1")
        need(self.distribution in {d.value for d in Distribution}, "distribution must be unif or exp")
        need(self.body_samples >= 1, "body_samples must be >= 1")
        need(0.0 <= self.min_conf <= 1.0, "min_conf must lie in [0, 1]")
        need(self.min_body_support >= 0, "min_body_support must be >= 0")
        need(self.window is None or self.window > 0, "window must be positive or inf")
        need(self.k >= 1, "k must be >= 1")
        need(0.0 <= self.alpha <= 1.0, "alpha must lie in [0, 1]")
        need(self.lam > 0, "lam must be > 0")
        need(self.cap is None or self.cap >= 1, "cap must be >= 1")
        need(self.workers is None or self.workers >= 1, "workers must be >= 1")
        need(self.tie_policy in {p.value for p in TiePolicy}, "tie_policy must be best, average or worst")
        return self

    def resolved_paths(self):
        if self.dataset:
            d = Path(self.dataset)
            def opt(p, name):
                if p:
                    return p
                return str(d / name) if (d / name).exists() else None
            return self.train or str(d / "train.txt"), opt(self.valid, "valid.txt"), opt(self.test, "test.txt")
        if not self.train:
            raise ConfigError("either --dataset or --train is required")
        return self.train, self.valid, self.test

    def dataset_name(self) -> str:
        if self.dataset:
            return Path(self.dataset).name
        return Path(self.train).parent.name if self.train else ""

    def effective_window(self) -> float:
        if self.window is not None:
            return self.window
        return DATASET_WINDOWS.get(self.dataset_name().lower(), INFINITE)

    def effective_workers(self) -> int:
        return self.workers if self.workers is not None else _parallel.default_workers()

    def to_json(self) -> str:
        d = dataclasses.asdict(self)
        if d["window"] is not None and math.isinf(d["window"]):
            d["window"] = "inf"
        return json.dumps(d, sort_keys=True)


def _parse_window(value):
    if value is None:
        return None
    if isinstance(value, str) and value.lower() in {"inf", "infinite", "none"}:
        return INFINITE
    return float(value)


def _config_from_file(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def build_config(args: argparse.Namespace) -> RunConfig:
    values = _config_from_file(args.config) if getattr(args, "config", None) else {}
    for f in dataclasses.fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None and v is not False:
            values[f.name] = v
    if "window" in values:
        values["window"] = _parse_window(values["window"])
    return RunConfig(**values).validate()


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", help="directory with train.txt / valid.txt / test.txt")
    p.add_argument("--train")
    p.add_argument("--valid")
    p.add_argument("--test")
    p.add_argument("--separator")
    p.add_argument("--config", help="JSON file with RunConfig keys; flags override it")
    p.add_argument("--workers", type=int, help="worker processes (env TKGRULES_WORKERS, else CPU count)")
    p.add_argument("--log", help="also write the log to this file")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_apply_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rules", required=True, help="rule file written by 'learn'")
    p.add_argument("--lengths", type=int, nargs="+", help="only use rules of these lengths")
    p.add_argument("--min-conf", dest="min_conf", type=float)
    p.add_argument("--min-body-support", dest="min_body_support", type=int)
    p.add_argument("--window", help="time window size or 'inf'")
    p.add_argument("--k", type=int, help="stop after this many distinct candidates")
    p.add_argument("--alpha", type=float, help="weight of the rule confidence in the score")
    p.add_argument("--lam", type=float, help="decay rate of the time term in the score")
    p.add_argument("--cap", type=int, help="keep at most this many partial walks per join stage")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tkgrules", description="Temporal rule mining and link forecasting.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="dataset statistics")
    _add_data_args(p)

    p = sub.add_parser("learn", help="mine temporal rules from the training split")
    _add_data_args(p)
    p.add_argument("--rules", required=True, help="output rule file")
    p.add_argument("--walks", type=int)
    p.add_argument("--lengths", type=int, nargs="+")
    p.add_argument("--distribution", choices=[d.value for d in Distribution])
    p.add_argument("--body-samples", dest="body_samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--exhaustive-confidence", dest="exhaustive_confidence", action="store_true")

    p = sub.add_parser("eval", help="evaluate rules on the valid or test split")
    _add_data_args(p)
    _add_apply_args(p)
    p.add_argument("--split", choices=["valid", "test"], default="test")
    p.add_argument("--out", help="output prefix for <out>.metrics.txt and <out>.ranks.csv")
    p.add_argument("--tie-policy", dest="tie_policy", choices=[t.value for t in TiePolicy])
    p.add_argument("--strict-train-only", dest="strict_train_only", action="store_true",
                   help="match rule bodies against training facts only")
    p.add_argument("--inductive", action="store_true",
                   help="rules come from another dataset; resolve them by relation name")

    p = sub.add_parser("apply", help="answer one query and explain the top candidate")
    _add_data_args(p)
    _add_apply_args(p)
    p.add_argument("--subject", required=True)
    p.add_argument("--relation", required=True, help="relation name; append ^-1 for subject prediction")
    p.add_argument("--time", required=True, help="query timestamp as written in the data files")
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--explain", action="store_true")
    return parser


def _setup_logging(args) -> None:
    root = logging.getLogger("tkgrules")
    root.handlers.clear()
    root.setLevel(logging.DEBUG if args.verbose else logging.INFO)
    fmt = logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
    h = logging.StreamHandler(sys.stderr)
    h.setFormatter(fmt)
    root.addHandler(h)
    if args.log:
        fh = logging.FileHandler(args.log, encoding="utf-8")
        fh.setFormatter(fmt)
        root.addHandler(fh)
    root.propagate = False


def _load(cfg: RunConfig):
    train, valid, test = cfg.resolved_paths()
    return load_dataset(train, valid, test, cfg.separator, name=cfg.dataset_name())


def _load_rules(cfg: RunConfig, path, vocab):
    rs = load_rules(path, vocab)
    if rs.skipped:
        logger.warning("skipped %d rules with relations unknown to this dataset", rs.skipped)
    rs = filter_rules(rs, cfg.min_conf, cfg.min_body_support).restrict_lengths(cfg.lengths)
    logger.info("using %d rules %s", len(rs), rs.count_by_length())
    return rs


def _params(cfg: RunConfig) -> ApplyParams:
    return ApplyParams(cfg.effective_window(), cfg.k, cfg.alpha, cfg.lam, cfg.cap, TiePolicy(cfg.tie_policy))


def cmd_stats(cfg: RunConfig, args, out) -> int:
    data = _load(cfg)
    counts = data.raw_counts
    all_stats = data.graph.stats()
    rows = [("G_train", counts.get("train", 0)), ("G_valid", counts.get("valid", 0)),
            ("G_test", counts.get("test", 0)), ("E", all_stats["entities"]),
            ("R", all_stats["relations"]), ("T", all_stats["timestamps"])]
    for key, value in rows:
        out.write(f"{key}\t{value}\n")
    return 0


def cmd_learn(cfg: RunConfig, args, out) -> int:
    data = _load(cfg)
    started = time.perf_counter()
    mode = ConfidenceMode.EXHAUSTIVE if cfg.exhaustive_confidence else ConfidenceMode.SAMPLED
    rs = learn_rules(data.train, lengths=cfg.lengths, n=cfg.walks, dist=Distribution(cfg.distribution),
                     seed=cfg.seed, b=cfg.body_samples, mode=mode, workers=cfg.effective_workers())
    save_rules(args.rules, rs, data.vocab)
    elapsed = time.perf_counter() - started
    counts = rs.count_by_length()
    logger.info("wrote %d rules to %s in %.1fs", len(rs), args.rules, elapsed)
    out.write(f"rules\t{len(rs)}\n")
    for length, n in counts.items():
        out.write(f"length_{length}\t{n}\n")
    out.write(f"seconds\t{elapsed:.1f}\n")
    return 0


def cmd_eval(cfg: RunConfig, args, out) -> int:
    data = _load(cfg)
    rules = _load_rules(cfg, args.rules, data.vocab)
    target = data.split(args.split)
    graph = data.train if cfg.strict_train_only else data.graph
    if args.inductive:
        logger.info("inductive run: rules resolved against %s by relation name", cfg.dataset_name())
    report = evaluate(data.train, rules, target, _params(cfg), graph=graph, known_facts=data.graph,
                      workers=cfg.effective_workers())
    table = report.format_table()
    out.write(table)
    if args.out:
        Path(args.out + ".metrics.txt").write_text(table, encoding="utf-8")
        Path(args.out + ".ranks.csv").write_text(report.to_csv(data.vocab), encoding="utf-8")
        logger.info("wrote %s.metrics.txt and %s.ranks.csv", args.out, args.out)
    return 0


def cmd_apply(cfg: RunConfig, args, out) -> int:
    data = _load(cfg)
    vocab = data.vocab
    rules = _load_rules(cfg, args.rules, vocab)
    try:
        subject = vocab.entity_id(args.subject)
    except KeyError:
        raise ConfigError(f"unknown entity {args.subject!r}") from None
    query = Query(subject, vocab.relation_id(args.relation), vocab.encode_time(args.time))
    p = _params(cfg)
    group = rules.for_relation(query.relation)
    view = window_subgraph(data.graph, query.query_time, p.window)
    scored = apply_rules(view, group, query, p.k, p.a, p.lam, p.K, explain=True)
    if len(scored) == 0:
        out.write("no candidates from rules\n")
        return 0
    ranked = aggregate(scored)
    for entity, score in ranked.entries[: args.top]:
        out.write(f"{score:.4f}\t{vocab.entity_name(entity)}\n")
    if args.explain:
        best = ranked.entries[0][0]
        out.write(f"\nexplanation for {vocab.entity_name(best)}:\n")
        for ex in sorted(scored.explanations[best], key=lambda e: -e.score):
            rule = group[ex.rule_index]
            out.write(f"  rule  {format_rule_human(rule, vocab)}\n")
            out.write(f"  walk  {format_grounding(rule, ex.entities, ex.timestamps, vocab)}"
                      f"  (score {ex.score:.4f})\n")
    return 0


COMMANDS = {"stats": cmd_stats, "learn": cmd_learn, "eval": cmd_eval, "apply": cmd_apply}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = make_parser()
    args = parser.parse_args(argv)
    _setup_logging(args)
    try:
        cfg = build_config(args)
        logger.info("config %s", cfg.to_json())
        return COMMANDS[args.command](cfg, args, out)
    except (TkgError, OSError, KeyError, json.JSONDecodeError) as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
