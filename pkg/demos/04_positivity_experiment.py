"""Randomized positivity batch: twenty strict-DEC datasets, one verdict each.

Runs the entire chain (generation, barrier, capillary parameters, exhaustion
solve, every audit, mass fit) on randomized datasets and prints one row per
seed.  Every dataset with a positive energy margin and green audits must
produce a positive mass parameter.
"""

from janglab import experiment_csv, positivity_experiment
from janglab.pipeline import default_grid

report = positivity_experiment(n=4, count=20, seed=1, grid=default_grid())
print(experiment_csv(report))
print(f"batch verdict: passed = {report['passed']} "
      f"({report['n_positive']}/{report['count']} positive mass)")
