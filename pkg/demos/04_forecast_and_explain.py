"""
Answering a forecasting query with explanations
===============================================

"""

from tkgrules import (Query, aggregate, dataset_from_quadruples, filter_rules, format_grounding,
                      format_rule_human, learn_rules, apply_rules, window_subgraph)
from tkgrules.synthetic import causal_events, split_by_time

data = dataset_from_quadruples(*split_by_time(causal_events(seed=3), 90, 105))
vocab = data.vocab
rules = filter_rules(learn_rules(data.train, seed=12))

# pick a 'sign' fact from the test split and hide its object
sign = vocab.relation_id("sign")
fact = next(e for e in data.test.edges() if e.relation == sign)
query = Query(fact.subject, sign, fact.timestamp)
print("query:", vocab.entity_name(fact.subject), "sign ?", "at", fact.timestamp,
      "| truth:", vocab.entity_name(fact.object))

# rule bodies are matched against everything known before the query time
view = window_subgraph(data.graph, query.query_time)
scored = apply_rules(view, rules.for_relation(sign), query, k=20, explain=True)
ranked = aggregate(scored)
for entity, score in ranked.entries[:5]:
    print(f"{score:.3f}  {vocab.entity_name(entity)}")

# why the top candidate: each rule that fired, with the walk that grounded it
best = ranked.entries[0][0]
group = rules.for_relation(sign)
for ex in sorted(scored.explanations[best], key=lambda e: -e.score)[:3]:
    rule = group[ex.rule_index]
    print(format_rule_human(rule, vocab))
    print("   ", format_grounding(rule, ex.entities, ex.timestamps, vocab), f"-> {ex.score:.3f}")
