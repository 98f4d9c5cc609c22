"""Comparison optimizers built on the same GP and acquisition code.

``run_cbo`` is constrained BO with no violation budget: it maximizes CEI over
the whole domain and never stops early. ``run_safe_bo`` is a simplified
confidence-bound safe BO, not a reimplementation of SafeOpt: it maximizes CEI
over the points whose upper confidence bound ``mu + m * sigma`` is <= 0 for
every constraint, and has no Lipschitz-based expander set.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acquisition import cei
from .exceptions import InvalidArgumentError
from .optimizer import AuxiliarySolution, default_solver, run
from .problems import grid_points

__all__ = ["SafeBoSettings", "run_cbo", "run_safe_bo", "safe_upper_bounds"]


@dataclass(frozen=True)
class SafeBoSettings:
    confidence_multiplier: float = 2.0

    def __post_init__(self):
        if not self.confidence_multiplier > 0:
            raise InvalidArgumentError("confidence_multiplier must be positive")


def run_cbo(problem, config):
    """Constrained BO: CEI over the whole domain, violations unbounded."""
    return run(problem, config, algorithm="cbo")


def safe_upper_bounds(ctx, X, m):
    """``mu_i + m * sigma_i`` for every constraint, shape ``(len(X), N)``."""
    X = np.atleast_2d(X)
    cols = []
    for gp in ctx.constraint_gps:
        mean, sd = gp.predict(X)
        cols.append(mean + m * sd)
    return np.stack(cols, axis=1) if cols else np.full((len(X), 0), -np.inf)


def _candidates(solver, domain, rng):
    if solver.kind == "grid":
        return grid_points(domain, solver.resolution)
    lo, hi = domain[:, 0], domain[:, 1]
    return lo + (hi - lo) * rng.random((solver.n_starts * 50, len(lo)))


def run_safe_bo(problem, config, settings=None):
    """Confidence-bound safe BO.

    If no candidate is in the safe set, the known-safe evaluated point with
    the smallest total constraint uncertainty is evaluated again (earliest
    first among ties) and the iteration is flagged ``chance_set_empty``.
    """
    settings = settings or SafeBoSettings()
    m = float(settings.confidence_multiplier)
    solver = config.solver or default_solver(problem.dimension)

    def select(ctx, domain, rng):
        X = _candidates(solver, domain, rng)
        ucb = safe_upper_bounds(ctx, X, m)
        safe = np.all(ucb <= 0.0, axis=1)
        if safe.any():
            acq = np.atleast_1d(cei(ctx, X))
            k = int(np.argmax(np.where(safe, acq, -np.inf)))
            return AuxiliarySolution(X[k], float(acq[k]), float("nan"), False, tuple(ucb[k]))
        gp0 = ctx.constraint_gps[0] if ctx.constraint_gps else ctx.objective_gp
        data_X = gp0.X
        observed = np.stack([gp.y for gp in ctx.constraint_gps], axis=1)
        known_safe = np.flatnonzero(np.all(observed <= 0.0, axis=1))
        if known_safe.size == 0:
            known_safe = np.arange(len(data_X))
        sds = np.stack([gp.predict(data_X[known_safe])[1] for gp in ctx.constraint_gps], axis=1)
        k = known_safe[int(np.argmin(sds.sum(axis=1)))]
        x = data_X[k]
        return AuxiliarySolution(
            x, float(cei(ctx, x[None, :])[0]), float("nan"), True,
            tuple(safe_upper_bounds(ctx, x[None, :], m)[0]),
        )

    return run(problem, config, algorithm="safe_bo", selector=select)
