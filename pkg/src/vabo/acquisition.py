"""Constrained expected improvement and the probabilistic budget constraint.

All functions broadcast over numpy arrays, so a whole grid of candidate
points is scored with one call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .violation import inverse_cost

__all__ = [
    "SIGMA_FLOOR",
    "norm_cdf",
    "norm_pdf",
    "expected_improvement",
    "feasibility_probability",
    "AcquisitionContext",
    "cei",
    "budget_constraint_probability",
    "is_chance_feasible",
]

# Below this standard deviation a Gaussian is treated as a point mass.
SIGMA_FLOOR = 1e-12

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def norm_cdf(z):
    """Standard normal CDF via the complementary error function (``scipy.special.ndtr``)."""
    return ndtr(z)


def norm_pdf(z):
    z = np.asarray(z, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def _scalar_out(x, *inputs):
    if all(np.ndim(v) == 0 for v in inputs):
        return float(x)
    return x


def expected_improvement(mean, sd, incumbent):
    """Closed-form expected improvement of a Gaussian below ``incumbent``.

    With ``z = (incumbent - mean) / sd`` this is
    ``(incumbent - mean) * Phi(z) + sd * phi(z)``; for ``sd <= SIGMA_FLOOR``
    it degenerates to ``max(0, incumbent - mean)``.
    """
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    diff = incumbent - mean
    safe_sd = np.where(sd > SIGMA_FLOOR, sd, 1.0)
    z = diff / safe_sd
    ei = diff * norm_cdf(z) + safe_sd * norm_pdf(z)
    out = np.where(sd > SIGMA_FLOOR, np.maximum(ei, 0.0), np.maximum(diff, 0.0))
    return _scalar_out(out, mean, sd, incumbent)


def feasibility_probability(mean, sd, threshold=0.0):
    """``Pr(g <= threshold)`` for ``g ~ N(mean, sd**2)``."""
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    safe_sd = np.where(sd > SIGMA_FLOOR, sd, 1.0)
    with np.errstate(invalid="ignore"):
        p = norm_cdf((threshold - mean) / safe_sd)
    out = np.where(sd > SIGMA_FLOOR, p, (mean <= threshold).astype(float))
    return _scalar_out(out, mean, sd, threshold)


@dataclass(frozen=True)
class AcquisitionContext:
    """Everything the auxiliary problem needs at one iteration.

    ``chance_constraint=False`` removes the budget constraint entirely, which
    is how plain constrained BO is expressed.
    """

    objective_gp: object
    constraint_gps: tuple
    incumbent_value: float
    remaining_budgets: tuple
    beta: tuple
    epsilon: float
    cost_fns: tuple
    chance_constraint: bool = True

    def __post_init__(self):
        object.__setattr__(self, "constraint_gps", tuple(self.constraint_gps))
        object.__setattr__(self, "remaining_budgets", tuple(float(b) for b in self.remaining_budgets))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        object.__setattr__(self, "cost_fns", tuple(self.cost_fns))
        n = len(self.constraint_gps)
        if not (len(self.remaining_budgets) == len(self.beta) == len(self.cost_fns) == n):
            raise ValueError("per-constraint fields must all have length N")
        if any(not 0.0 <= b <= 1.0 for b in self.beta):
            raise ValueError("beta must lie in [0, 1]")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")

    @property
    def thresholds(self):
        """Largest tolerated violation per constraint, ``c^-1(beta * max(0, B))``."""
        out = []
        for b, B, fn in zip(self.beta, self.remaining_budgets, self.cost_fns):
            allowance = b * max(0.0, B) if b > 0 else 0.0
            out.append(inverse_cost(fn, allowance))
        return tuple(out)


def _points(theta, gp):
    # a 1-D input is one point, except in 1-D problems where it is a list of points
    X = np.asarray(theta, dtype=float)
    if X.ndim == 2:
        return X, False
    if X.ndim == 0 or (X.ndim == 1 and (gp.dim > 1 or X.size == 1)):
        return X.reshape(1, -1), True
    return X.reshape(-1, 1), False


def _finish(values, single):
    return float(values[0]) if single else values


def cei(ctx, theta):
    """Constrained expected improvement at one point or at the rows of ``theta``."""
    X, single = _points(theta, ctx.objective_gp)
    mean, sd = ctx.objective_gp.predict(X)
    value = expected_improvement(mean, sd, ctx.incumbent_value)
    for gp in ctx.constraint_gps:
        gm, gs = gp.predict(X)
        value = value * feasibility_probability(gm, gs)
    return _finish(np.asarray(value, dtype=float), single)


def budget_constraint_probability(ctx, theta):
    """Probability that no constraint uses more than its allowed share of budget.

    Product over constraints of ``Phi((c_i^-1(beta_i * B_i) - mu_i) / sigma_i)``;
    the remaining budget is clamped at 0. Equals 1 when the chance constraint
    is switched off.
    """
    X, single = _points(theta, ctx.objective_gp)
    prob = np.ones(X.shape[0])
    if ctx.chance_constraint:
        for gp, r in zip(ctx.constraint_gps, ctx.thresholds):
            if math.isinf(r):
                continue
            gm, gs = gp.predict(X)
            prob = prob * feasibility_probability(gm, gs, r)
    return _finish(prob, single)


def is_chance_feasible(ctx, theta):
    """Whether the budget constraint holds, ``probability >= 1 - epsilon``."""
    p = budget_constraint_probability(ctx, theta)
    return _chance_ok(p, ctx.epsilon)


def _chance_ok(prob, epsilon):
    ok = np.asarray(prob) >= 1.0 - epsilon
    return bool(ok) if ok.ndim == 0 else ok
