#!/usr/bin/env python3
"""Reproduce the benchmark checkpoint table.

Usage: python3 04_benchmark_table.py [K]

Runs the bundled one-dimensional-index benchmark with the default budget
(N = 1000 samples, seed 1) up to K rounds (default 10000) and prints the
checkpoint CSV.  The averaged objective climbs toward the optimum near
3.221 while the worst-case constraint violation decays.
"""

import sys

from sipsolve import AlgoParams, catalog_test_problem, run
from sipsolve.cli import report_to_csv

k_total = int(sys.argv[1]) if len(sys.argv) > 1 else 10_000
marks = [k for k in (500, 1000, 3000, 5000, 10000, 20000, 40000, 60000) if k <= k_total]
if marks[-1] != k_total:
    marks.append(k_total)

problem = catalog_test_problem()
report = run(problem, AlgoParams(K=k_total), checkpoints=marks)

print(report_to_csv(report), end="")
print()
print(f"x_bar = {report.x_bar}")
print(f"posterior gap bound  = {report.gap_bound:.4g}")
print(f"violation bound      = {report.violation_bound:.4g}")
