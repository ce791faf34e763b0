"""
Time-aware filtered evaluation
==============================

"""

from tkgrules import ApplyParams, TiePolicy, dataset_from_quadruples, evaluate, filter_rules, learn_rules
from tkgrules.synthetic import causal_events, split_by_time

data = dataset_from_quadruples(*split_by_time(causal_events(seed=4), 90, 105))
rules = filter_rules(learn_rules(data.train, seed=12))

# object and subject prediction for every test fact
report = evaluate(data.train, rules, data.test, graph=data.graph)
print(report.format_table())

# how the window and tie handling move the numbers
for params in (ApplyParams(window=5), ApplyParams(tie_policy=TiePolicy.BEST),
               ApplyParams(tie_policy=TiePolicy.WORST)):
    mrr = evaluate(data.train, rules, data.test, params, graph=data.graph).mrr
    print(f"window={params.window} ties={params.tie_policy.value}: MRR {mrr:.4f}")

# a few per-query rows as they appear in the CSV output
print("\n".join(report.to_csv(data.vocab).splitlines()[:4]))
