"""
Vapor compression surrogate campaign
====================================

Run the default campaign (VABO, constrained BO and safe BO with budgets 0,
10 and 20, ten seeds, 20 iterations each) on the 3-D vapor compression
surrogate and print the summary table. Traces and charts are written to a
temporary directory. Takes about a minute.

The surrogate's grid optimum stored in ``VcsSurrogate.known_optimum`` is
regenerated at the end.
"""

import csv
import sys
import tempfile

from vabo import VcsSurrogate, brute_force_optimum
from vabo.campaign import run_campaign
from vabo.config import validate_config

config = validate_config("")  # the defaults are this campaign
out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="vcs-")
run_campaign(config, out)

with open(f"{out}/summary.csv", newline="") as fh:
    for row in csv.DictReader(fh):
        print(f"{row['algorithm']:8s} B={row['budget']:>2s}  power {float(row['final_incumbent_mean']):7.1f} W"
              f"  violation cost {float(row['total_spent_mean']):7.2f}")
print("outputs in", out)

p = VcsSurrogate()
start, g = p.evaluate([280.0, 380.0, 700.0])
theta, value = brute_force_optimum(p, p.optimum_resolution)
print(f"initial point: {start:.1f} W (T_d margin {-g[0]:.2f} K)")
print(f"grid optimum:  {value:.1f} W at {theta.round(2)}")
