"""Temporal rule mining and link forecasting on temporal knowledge graphs.

Typical use::

    from tkgrules import load_dataset_dir, learn_rules, filter_rules, evaluate

    data = load_dataset_dir("ICEWS14")
    rules = filter_rules(learn_rules(data.train, workers=8))
    report = evaluate(data.train, rules, data.test, graph=data.graph)
    print(report.format_table())
"""

from .applier import (BodyGroundings, Query, ScoredCandidates, apply_rules, find_body_groundings,
                      format_grounding, score_candidate)
from .errors import (EmptyCandidateSet, EmptyDataset, MalformedLine, NoGroundings, NoHeadEdges,
                     TkgError, TruthOutOfUniverse, UnknownRelation, UnparsableTimestamp)
from .graph import (INFINITE, Dataset, Edge, SubgraphView, TkgStore, Vocabulary, build_store,
                    dataset_from_quadruples, edges_from, load_dataset, load_dataset_dir,
                    load_quadruples, parse_quadruple, window_subgraph)
from .ranking import (ApplyParams, EvalReport, Provenance, RankedAnswer, TiePolicy, aggregate,
                      baseline_distribution, evaluate, noisy_or, rank_of_answer, time_aware_filter)
from .rules import (ConfidenceMode, RuleSet, TemporalRule, deserialize_rules, estimate_confidence,
                    filter_rules, format_rule_human, learn_rules, lift_walk_to_rule, load_rules,
                    save_rules, serialize_rules)
from .walks import (Distribution, TemporalWalk, feasible_transitions, sample_temporal_walk,
                    transition_probabilities)

__version__ = "0.1.0"
