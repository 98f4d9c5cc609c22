"""Violation cost functions, their generalized inverses and budget bookkeeping.

A violation cost maps the positive part of a constraint value to a
nonnegative cost. Every shipped kind satisfies ``c(0) = 0``, is
non-decreasing and is continuous (hence left continuous) on ``[0, inf)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidArgumentError

__all__ = [
    "ViolationCost",
    "quadratic",
    "linear",
    "table",
    "violation_cost",
    "inverse_cost",
    "ViolationAccount",
    "charge",
]

KINDS = ("quadratic", "linear", "table")
BISECTION_TOL = 1e-10


@dataclass(frozen=True)
class ViolationCost:
    """A violation cost function.

    ``quadratic``: ``scale * s**2``. ``linear``: ``scale * s``.
    ``table``: piecewise-linear interpolation through ``(breakpoints, values)``,
    held constant past the last breakpoint. Breakpoints must start at 0 and
    increase; values must start at 0 and not decrease.
    """

    kind: str = "quadratic"
    scale: float = 1.0
    breakpoints: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown violation cost kind {self.kind!r}")
        if self.kind == "table":
            bp = tuple(float(v) for v in self.breakpoints)
            vals = tuple(float(v) for v in self.values)
            object.__setattr__(self, "breakpoints", bp)
            object.__setattr__(self, "values", vals)
            if len(bp) < 2 or len(bp) != len(vals):
                raise InvalidArgumentError("table needs >= 2 breakpoints and matching values")
            if bp[0] != 0.0 or vals[0] != 0.0:
                raise InvalidArgumentError("table must start at (0, 0)")
            if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
                raise InvalidArgumentError("table breakpoints must be strictly increasing")
            if any(v2 < v1 for v1, v2 in zip(vals, vals[1:])):
                raise InvalidArgumentError("table values must be non-decreasing")
        elif not self.scale > 0:
            raise InvalidArgumentError("scale must be positive")

    def __call__(self, s):
        """Cost of a nonnegative violation magnitude ``s``."""
        s = float(s)
        if s <= 0.0:
            return 0.0
        if self.kind == "quadratic":
            return self.scale * s * s
        if self.kind == "linear":
            return self.scale * s
        return float(np.interp(s, self.breakpoints, self.values))

    @property
    def strictly_increasing(self):
        if self.kind != "table":
            return True
        return all(v2 > v1 for v1, v2 in zip(self.values, self.values[1:]))

    def to_dict(self):
        if self.kind == "table":
            return {"kind": "table", "breakpoints": list(self.breakpoints),
                    "values": list(self.values)}
        return {"kind": self.kind, "scale": self.scale}


def quadratic(scale=1.0):
    return ViolationCost("quadratic", scale)


def linear(scale=1.0):
    return ViolationCost("linear", scale)


def table(breakpoints, values):
    return ViolationCost("table", breakpoints=tuple(breakpoints), values=tuple(values))


def violation_cost(fn, g_value):
    """Cost of the constraint value ``g_value``; zero whenever it is <= 0."""
    return fn(max(float(g_value), 0.0))


def inverse_cost(fn, s, r_max=math.inf):
    """Largest violation whose cost does not exceed ``s``.

    Returns ``sup{r in [0, r_max] : fn(r) <= s}``. Exact for the quadratic and
    linear kinds; bisection to ``1e-10`` absolute for tables. If the cost never
    exceeds ``s`` on ``[0, r_max]`` the result is ``r_max``, which is infinite
    by default (e.g. an infinite budget, or a table saturating below ``s``).
    """
    s = float(s)
    if s < 0 or math.isnan(s):
        raise InvalidArgumentError("inverse_cost needs s >= 0")
    if math.isinf(s):
        return r_max
    if fn.kind == "quadratic":
        return min(math.sqrt(s / fn.scale), r_max)
    if fn.kind == "linear":
        return min(s / fn.scale, r_max)

    bp, vals = fn.breakpoints, fn.values
    if vals[-1] <= s:
        return r_max
    # first breakpoint whose value exceeds s; the sup lies in the segment before it
    k = next(i for i, v in enumerate(vals) if v > s)
    lo, hi = bp[k - 1], bp[k]
    if lo >= r_max:
        return r_max
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if fn(mid) <= s:
            lo = mid
        else:
            hi = mid
    return min(lo, r_max)


@dataclass(frozen=True)
class ViolationAccount:
    """Budgets, cumulative violation costs and the cost functions, per constraint."""

    budgets: tuple
    cost_fns: tuple
    spent: tuple = field(default=None)

    def __post_init__(self):
        budgets = tuple(float(b) for b in self.budgets)
        object.__setattr__(self, "budgets", budgets)
        object.__setattr__(self, "cost_fns", tuple(self.cost_fns))
        if self.spent is None:
            object.__setattr__(self, "spent", tuple(0.0 for _ in budgets))
        else:
            object.__setattr__(self, "spent", tuple(float(v) for v in self.spent))
        if not (len(budgets) == len(self.cost_fns) == len(self.spent)):
            raise InvalidArgumentError("budgets, cost_fns and spent must have equal length")
        if any(b < 0 or math.isnan(b) for b in budgets):
            raise InvalidArgumentError("budgets must be nonnegative")

    @property
    def n_constraints(self):
        return len(self.budgets)

    @property
    def remaining(self):
        return tuple(b - s for b, s in zip(self.budgets, self.spent))


def charge(account, g_values):
    """Charge the violation costs of observed constraint values.

    Returns the updated account and the set of (0-based) constraint indices
    whose remaining budget is now strictly negative.
    """
    g_values = np.atleast_1d(np.asarray(g_values, dtype=float))
    if g_values.shape != (account.n_constraints,):
        raise InvalidArgumentError(
            f"expected {account.n_constraints} constraint values, got {g_values.shape}"
        )
    spent = tuple(
        s + violation_cost(fn, g) for s, fn, g in zip(account.spent, account.cost_fns, g_values)
    )
    new = ViolationAccount(account.budgets, account.cost_fns, spent)
    exhausted = frozenset(i for i, r in enumerate(new.remaining) if r < 0)
    return new, exhausted
