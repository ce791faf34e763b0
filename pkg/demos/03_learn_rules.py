"""
Mining temporal rules
=====================

"""

from tkgrules import build_store, filter_rules, format_rule_human, learn_rules, serialize_rules
from tkgrules.synthetic import causal_events

store = build_store(causal_events(seed=2))
vocab = store.vocab

# 200 walks per relation and length, exponential transitions, 500 sampled bodies per rule
rules = learn_rules(store, n=200, seed=12)
print(len(rules), "raw rules", rules.count_by_length())

# drop rules that are too weak or rest on a single body
rules = filter_rules(rules, min_conf=0.01, min_body_support=2)
print(len(rules), "after filtering")

# the planted patterns surface near the top of their groups
for head in ("sign", "protest", "cooperate"):
    group = rules.for_relation(vocab.relation_id(head))
    for rule in group[:3]:
        print(format_rule_human(rule, vocab), f"[{rule.rule_support}/{rule.body_support}]")
    print()

# rules are stored one JSON object per line and refer to relations by name
print(serialize_rules(rules, vocab).splitlines()[0])
