"""Seeded experiment campaigns: one run per (algorithm, budget, seed) cell.

Outputs, all in one directory:

``trace_<algorithm>_<budget>_<seed>.csv``
    One row per evaluation; the initial safe points come first with
    iteration 0. Columns: ``iteration, theta_1..theta_n, objective,
    g_1..g_N, incumbent_value, spent_1..spent_N, remaining_1..remaining_N,
    chance_set_empty``.
``summary.csv``
    Per (algorithm, budget) cell: final incumbent and total violation cost
    (mean and sample standard deviation over seeds), and termination counts.
``convergence.svg`` / ``violation.svg``
    Seed-averaged best feasible objective and cumulative violation cost per
    iteration, rendered from the trace files.

Floats are written with 17 significant digits so reruns are byte-identical.
"""
from __future__ import annotations

import csv
import glob
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .baselines import run_cbo, run_safe_bo
from .optimizer import run
from .problems import NoisyProblem, get_problem
from .svg import line_chart

__all__ = [
    "trace_header",
    "trace_rows",
    "write_trace",
    "run_cell",
    "run_campaign",
    "budget_label",
    "write_summary",
    "render_charts",
]

log = logging.getLogger(__name__)


def fmt(value):
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def budget_label(budget):
    if math.isinf(budget):
        return "inf"
    if float(budget).is_integer():
        return str(int(budget))
    return format(budget, ".17g")


def trace_header(dim, n_constraints):
    return (
        ["iteration"]
        + [f"theta_{i + 1}" for i in range(dim)]
        + ["objective"]
        + [f"g_{i + 1}" for i in range(n_constraints)]
        + ["incumbent_value"]
        + [f"spent_{i + 1}" for i in range(n_constraints)]
        + [f"remaining_{i + 1}" for i in range(n_constraints)]
        + ["chance_set_empty"]
    )


def trace_rows(trace):
    """CSV rows (lists of strings) of a :class:`RunTrace`."""
    rows = []
    best = math.nan
    zeros = [0.0 for _ in trace.budgets]
    for obs in trace.initial:
        if obs.feasible and not (obs.objective >= best):
            best = obs.objective
        rows.append(
            ["0"] + [fmt(v) for v in obs.theta] + [fmt(obs.objective)]
            + [fmt(v) for v in obs.constraints] + [fmt(best)]
            + [fmt(v) for v in zeros] + [fmt(v) for v in trace.budgets] + ["0"]
        )
    for rec in trace.iterations:
        rows.append(
            [str(rec.t)] + [fmt(v) for v in rec.theta] + [fmt(rec.objective)]
            + [fmt(v) for v in rec.constraints] + [fmt(rec.incumbent_value)]
            + [fmt(v) for v in rec.spent] + [fmt(v) for v in rec.remaining]
            + ["1" if rec.chance_set_empty else "0"]
        )
    return rows


def write_trace(trace, path, dim, n_constraints):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(trace_header(dim, n_constraints))
        writer.writerows(trace_rows(trace))


def trace_filename(algorithm, budget, seed):
    return f"trace_{algorithm}_{budget_label(budget)}_{seed}.csv"


def run_cell(config, algorithm, budget, seed, out_dir):
    """Run one campaign cell, write its trace file and return a summary dict."""
    problem = get_problem(config.problem)
    if config.objective_noise_sd or config.constraint_noise_sd:
        problem = NoisyProblem(problem, config.objective_noise_sd, config.constraint_noise_sd, seed)
    rc = config.run_config(budget, seed, problem.n_constraints)
    if algorithm == "vabo":
        trace = run(problem, rc)
    elif algorithm == "cbo":
        trace = run_cbo(problem, rc)
    elif algorithm == "safe_bo":
        trace = run_safe_bo(problem, rc, config.safe_bo)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    path = os.path.join(out_dir, trace_filename(algorithm, budget, seed))
    write_trace(trace, path, problem.dimension, problem.n_constraints)
    try:
        final = trace.final_incumbent[1]
    except Exception:  # noqa: BLE001 - no feasible point at all
        final = math.nan
    return {
        "algorithm": algorithm,
        "budget": budget,
        "seed": seed,
        "final_incumbent": final,
        "total_spent": float(sum(trace.total_spent)),
        "termination": trace.termination,
        "error": trace.error,
    }


def _run_cell_args(args):
    return run_cell(*args)


def _mean_sd(values):
    values = np.asarray([v for v in values if not math.isnan(v)], dtype=float)
    if values.size == 0:
        return math.nan, math.nan
    sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return float(np.mean(values)), sd


SUMMARY_HEADER = [
    "algorithm", "budget", "runs", "final_incumbent_mean", "final_incumbent_sd",
    "total_spent_mean", "total_spent_sd", "budget_exhausted_runs", "evaluation_failures",
]


def write_summary(results, path):
    cells = {}
    for r in results:
        cells.setdefault((r["algorithm"], r["budget"]), []).append(r)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for (alg, budget), rs in cells.items():
            inc_m, inc_s = _mean_sd([r["final_incumbent"] for r in rs])
            sp_m, sp_s = _mean_sd([r["total_spent"] for r in rs])
            writer.writerow([
                alg, budget_label(budget), len(rs), fmt(inc_m), fmt(inc_s), fmt(sp_m), fmt(sp_s),
                sum(r["termination"] == "budget_exhausted" for r in rs),
                sum(r["termination"] == "evaluation_failure" for r in rs),
            ])


def _read_trace(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return rows


def _cell_series(paths, column_fn, T):
    """Seed-averaged series over iterations 0..T, carrying the last row forward."""
    per_seed = []
    for p in paths:
        rows = _read_trace(p)
        by_iter = {}
        for row in rows:
            by_iter[int(row["iteration"])] = column_fn(row)
        vals, last = [], math.nan
        for t in range(T + 1):
            last = by_iter.get(t, last)
            vals.append(last)
        per_seed.append(vals)
    arr = np.asarray(per_seed, dtype=float)
    with np.errstate(all="ignore"):
        means = [float(np.nanmean(col)) if np.any(np.isfinite(col)) else math.nan for col in arr.T]
    return list(range(T + 1)), means


def render_charts(out_dir, cells, T):
    """Write ``convergence.svg`` and ``violation.svg`` from the trace files on disk."""
    conv, viol = {}, {}
    for alg, budget in cells:
        pattern = os.path.join(out_dir, f"trace_{alg}_{budget_label(budget)}_*.csv")
        paths = sorted(glob.glob(pattern))
        if not paths:
            continue
        label = f"{alg} B={budget_label(budget)}"
        conv[label] = _cell_series(paths, lambda r: float(r["incumbent_value"]), T)
        viol[label] = _cell_series(
            paths, lambda r: sum(float(v) for k, v in r.items() if k.startswith("spent_")), T
        )
    with open(os.path.join(out_dir, "convergence.svg"), "w", encoding="utf-8") as fh:
        fh.write(line_chart(conv, "Best feasible objective (mean over seeds)", "iteration", "objective"))
    with open(os.path.join(out_dir, "violation.svg"), "w", encoding="utf-8") as fh:
        fh.write(line_chart(viol, "Cumulative violation cost (mean over seeds)", "iteration", "violation cost"))


def run_campaign(config, out_dir, jobs=1):
    """Run every (algorithm, budget, seed) cell and write all outputs.

    Returns the process exit code: 0 on success, 1 if any run ended with an
    evaluation failure (all other outputs are still written).
    """
    os.makedirs(out_dir, exist_ok=True)
    cells = [(a, b) for a in config.algorithms for b in config.budgets]
    tasks = [(config, a, b, s, out_dir) for a, b in cells for s in config.seeds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell_args, tasks))
    else:
        results = [_run_cell_args(t) for t in tasks]
    write_summary(results, os.path.join(out_dir, "summary.csv"))
    render_charts(out_dir, cells, config.iterations)
    failures = [r for r in results if r["termination"] == "evaluation_failure"]
    for r in failures:
        log.error("%s B=%s seed=%s: %s", r["algorithm"], budget_label(r["budget"]), r["seed"], r["error"])
    return 1 if failures else 0
