"""
The evaluation grid
===================

Every representation and key policy on the bundled corpus, two emotions,
three samples per melody.
"""

from keyharm.experiment import METRIC_COLUMNS, format_table, run_experiment

result = run_experiment({"repeats": 3, "seed": 0})
print(format_table(result["table2"], METRIC_COLUMNS))
print(format_table(result["table3"], ("qd", "pd")))

# the ground-truth row is what a real corpus would be compared against
for name, cmp in result["real_vs_reference"].items():
    print(f"{name:>6}: {cmp['value']:.3f}  (published {cmp['reference']})")
