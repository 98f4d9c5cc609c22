"""
VABO, constrained BO and safe BO on a 2-D benchmark
===================================================

Same problem, same seeds, three acquisition strategies. Constrained BO
ignores the cost of violations, safe BO avoids violations altogether, and
VABO spends at most its budget.
"""

import numpy as np

from vabo import ConstrainedQuadratic2D, SafeBoSettings, VaboConfig, run, run_cbo, run_safe_bo
from vabo.problems import brute_force_optimum

problem = ConstrainedQuadratic2D()
_, best = brute_force_optimum(problem, 401)
print(f"grid optimum {best:.4f}")

results = {"vabo": [], "cbo": [], "safe_bo": []}
for seed in range(5):
    cfg = VaboConfig(max_iterations=20, budgets=(10.0,), n_random_initial=2, seed=seed)
    for name, trace in (
        ("vabo", run(problem, cfg)),
        ("cbo", run_cbo(problem, cfg)),
        ("safe_bo", run_safe_bo(problem, cfg, SafeBoSettings(2.0))),
    ):
        results[name].append((trace.final_incumbent[1], trace.total_spent[0]))

for name, rows in results.items():
    rows = np.array(rows)
    print(f"{name:8s} final objective {rows[:, 0].mean():.4f}   violation cost {rows[:, 1].mean():8.2f}")
