"""Black-box problems: the evaluation contract and the built-in test problems.

Custom problems subclass :class:`BlackBoxProblem` (or build one from two
callables with :meth:`BlackBoxProblem.from_functions`) and may be added to
the name registry with :func:`register`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError, StateError
from .gp import RbfKernel

__all__ = [
    "BlackBoxProblem",
    "Parabola1D",
    "ConstrainedQuadratic2D",
    "VcsSurrogate",
    "NoisyProblem",
    "brute_force_optimum",
    "grid_points",
    "get_problem",
    "register",
    "list_problems",
]


@dataclass(frozen=True)
class GpDefaults:
    """Kernel hyperparameters a problem suggests for its objective and constraints."""

    objective: RbfKernel
    constraints: tuple


class BlackBoxProblem:
    """A box-constrained black box returning an objective and N constraint values.

    Subclasses implement :meth:`_evaluate`. Constraints are satisfied when
    ``g <= 0``.

    Attributes
    ----------
    name : str
    domain : ndarray of shape (d, 2)
        Lower and upper bound per dimension.
    n_constraints : int
    initial_safe_points : ndarray of shape (k, d)
        Points known to satisfy every constraint.
    safe_region : ndarray of shape (d, 2) or None
        A sub-box known to be feasible, used to draw extra initial points.
    known_optimum : (ndarray, float) or None
        Best feasible point on a grid with ``optimum_resolution`` nodes per axis.
    gp_defaults : GpDefaults or None
    """

    name = "problem"
    domain = None
    n_constraints = 0
    initial_safe_points = None
    safe_region = None
    known_optimum = None
    optimum_resolution = None
    gp_defaults = None
    description = ""

    @property
    def dimension(self):
        return self.domain.shape[0]

    def evaluate(self, theta):
        """Return ``(objective, constraints)`` at a point inside the domain."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.dimension,):
            raise InvalidArgumentError(
                f"{self.name}: expected a point of dimension {self.dimension}"
            )
        tol = 1e-9 * (self.domain[:, 1] - self.domain[:, 0])
        if np.any(theta < self.domain[:, 0] - tol) or np.any(theta > self.domain[:, 1] + tol):
            raise InvalidArgumentError(f"{self.name}: point {theta} outside the domain")
        obj, g = self._evaluate(theta)
        return float(obj), np.atleast_1d(np.asarray(g, dtype=float)).reshape(self.n_constraints)

    def evaluate_many(self, X):
        """Vectorized evaluation for oracles; no domain check."""
        X = np.asarray(X, dtype=float).reshape(-1, self.dimension)
        objs, gs = zip(*(self._evaluate(x) for x in X))
        return np.asarray(objs, dtype=float), np.asarray(gs, dtype=float).reshape(len(X), -1)

    def _evaluate(self, theta):
        raise NotImplementedError

    def sample_safe_points(self, rng, n):
        """``n`` points drawn uniformly from :attr:`safe_region`."""
        if n == 0:
            return np.empty((0, self.dimension))
        if self.safe_region is None:
            raise StateError(f"{self.name} has no known safe region to sample from")
        lo, hi = self.safe_region[:, 0], self.safe_region[:, 1]
        return lo + (hi - lo) * rng.random((n, self.dimension))

    @classmethod
    def from_functions(cls, name, domain, objective, constraints, initial_safe_points,
                       safe_region=None, gp_defaults=None):
        """Wrap plain callables ``objective(theta) -> float`` and
        ``constraints(theta) -> sequence of float`` as a problem."""
        domain = np.asarray(domain, dtype=float)
        n_constraints = len(np.atleast_1d(constraints(domain.mean(axis=1))))

        class _Wrapped(cls):
            def _evaluate(self, theta):
                return objective(theta), constraints(theta)

        prob = _Wrapped()
        prob.name = name
        prob.domain = domain
        prob.n_constraints = n_constraints
        prob.initial_safe_points = np.atleast_2d(np.asarray(initial_safe_points, dtype=float))
        prob.safe_region = None if safe_region is None else np.asarray(safe_region, dtype=float)
        prob.gp_defaults = gp_defaults
        return prob

    def __repr__(self):
        return f"<{type(self).__name__} {self.name!r} dim={self.dimension} N={self.n_constraints}>"


class Parabola1D(BlackBoxProblem):
    """``l(x) = x**2`` subject to ``g(x) = 1 - x <= 0`` on ``[-2, 2]``.

    The unconstrained minimizer 0 is infeasible; the constrained optimum is
    ``x = 1`` with ``l = 1``.
    """

    name = "parabola-1d"
    description = "x^2 subject to 1 - x <= 0 on [-2, 2]; optimum x=1, l=1"
    domain = np.array([[-2.0, 2.0]])
    n_constraints = 1
    initial_safe_points = np.array([[1.8]])
    safe_region = np.array([[1.5, 2.0]])
    known_optimum = (np.array([1.0]), 1.0)
    optimum_resolution = 100001
    gp_defaults = GpDefaults(
        objective=RbfKernel(4.0, (1.0,)),
        constraints=(RbfKernel(4.0, (1.5,)),),
    )

    def _evaluate(self, theta):
        x = theta[0]
        return x * x, (1.0 - x,)


class ConstrainedQuadratic2D(BlackBoxProblem):
    """Shifted bowl with a curved half-plane constraint on ``[0, 1]^2``.

    ``l(x) = 1 + 2 (x1 - 0.2)^2 + 2 (x2 - 0.3)^2``,
    ``g(x) = 10 (0.9 - x1 - x2 + 0.5 (x1 - 0.5)^2)``.

    The constraint is scaled so that one bad sample can cost as much as 81
    under a quadratic violation cost, which makes budgets of order 10 bind.
    """

    name = "quadratic-2d"
    description = "bowl at (0.2, 0.3) cut by a curved half-plane on [0,1]^2"
    domain = np.array([[0.0, 1.0], [0.0, 1.0]])
    n_constraints = 1
    initial_safe_points = np.array([[0.9, 0.9]])
    safe_region = np.array([[0.75, 1.0], [0.75, 1.0]])
    known_optimum = (np.array([0.4025, 0.5025]), 1.164025)
    optimum_resolution = 401
    gp_defaults = GpDefaults(
        objective=RbfKernel(1.0, (0.4, 0.4)),
        constraints=(RbfKernel(25.0, (0.5, 0.5)),),
    )

    def _evaluate(self, theta):
        x1, x2 = theta
        obj = 1.0 + 2.0 * (x1 - 0.2) ** 2 + 2.0 * (x2 - 0.3) ** 2
        g = 10.0 * (0.9 - x1 - x2 + 0.5 * (x1 - 0.5) ** 2)
        return obj, (g,)


class VcsSurrogate(BlackBoxProblem):
    """Steady-state stand-in for a vapor compression system.

    Inputs are expansion valve position (counts), indoor fan speed (rpm) and
    outdoor fan speed (rpm). The objective is electrical power in watts and
    the single constraint is ``g = T_d - 331`` with ``T_d`` the compressor
    discharge temperature in kelvin.

    With ``u`` the inputs rescaled to ``[0, 1]^3``:

    * power ``P = 1250 + 900 (u1 - 0.2)^2 + 350 (u2 - 0.35)^2 + 300 (u3 - 0.5)^2
      + 120 exp(-4 u2) - 80 u1 u2``
    * discharge temperature ``T_d = 320 + 20 exp(-2.5 u1) + 6 (1 - u2)
      + 3 (1 - u3) + 4 exp(-3 u1 - 3 u2)``

    Term by term, ``1170 <= P <= 2170`` W and ``-9.4 <= g <= 22`` K on the
    whole domain.

    Closing the valve (low ``u1``) saves power but drives ``T_d`` up, more so
    with a slow indoor fan, so the unconstrained power minimizer lies outside
    the feasible region. The coefficients are fixed constants; the feasible
    set, the initial point feasibility and the optimum headroom are checked
    in the test suite.
    """

    name = "vcs"
    description = "3-D vapor compression surrogate: power vs. discharge temperature <= 331 K"
    domain = np.array([[200.0, 300.0], [300.0, 400.0], [500.0, 800.0]])
    n_constraints = 1
    discharge_threshold = 331.0
    initial_safe_points = np.array([[280.0, 380.0, 700.0]])
    safe_region = np.array([[270.0, 300.0], [360.0, 400.0], [650.0, 750.0]])
    # grid optimum at resolution 61 per axis
    known_optimum = (np.array([240.0, 1085.0 / 3.0, 685.0]), 1305.422962365291)
    optimum_resolution = 61
    gp_defaults = GpDefaults(
        objective=RbfKernel(150.0**2, (12.0, 15.0, 45.0)),
        constraints=(RbfKernel(8.0**2, (12.0, 15.0, 45.0)),),
    )

    def _unit(self, theta):
        lo, hi = self.domain[:, 0], self.domain[:, 1]
        return (np.asarray(theta, dtype=float) - lo) / (hi - lo)

    def power(self, theta):
        u1, u2, u3 = self._unit(theta)
        return (
            1250.0
            + 900.0 * (u1 - 0.2) ** 2
            + 350.0 * (u2 - 0.35) ** 2
            + 300.0 * (u3 - 0.5) ** 2
            + 120.0 * math.exp(-4.0 * u2)
            - 80.0 * u1 * u2
        )

    def discharge_temperature(self, theta):
        u1, u2, u3 = self._unit(theta)
        return (
            320.0
            + 20.0 * math.exp(-2.5 * u1)
            + 6.0 * (1.0 - u2)
            + 3.0 * (1.0 - u3)
            + 4.0 * math.exp(-3.0 * u1 - 3.0 * u2)
        )

    def _evaluate(self, theta):
        return self.power(theta), (self.discharge_temperature(theta) - self.discharge_threshold,)


class NoisyProblem(BlackBoxProblem):
    """Adds seeded Gaussian noise to the objective and constraints of another problem."""

    def __init__(self, base, objective_sd=0.0, constraint_sd=0.0, seed=0):
        self.base = base
        self.name = f"{base.name}+noise"
        self.domain = base.domain
        self.n_constraints = base.n_constraints
        self.initial_safe_points = base.initial_safe_points
        self.safe_region = base.safe_region
        self.known_optimum = base.known_optimum
        self.optimum_resolution = base.optimum_resolution
        self.gp_defaults = base.gp_defaults
        self.objective_sd = float(objective_sd)
        self.constraint_sd = float(constraint_sd)
        self._rng = np.random.default_rng(seed)

    def _evaluate(self, theta):
        obj, g = self.base._evaluate(theta)
        obj = obj + self.objective_sd * self._rng.standard_normal()
        g = np.asarray(g, dtype=float) + self.constraint_sd * self._rng.standard_normal(len(g))
        return obj, g


def grid_points(domain, resolution):
    """All nodes of a regular grid over ``domain``, in lexicographic index order.

    ``resolution`` is an int (same for every dimension) or one int per dimension.
    """
    domain = np.asarray(domain, dtype=float)
    d = domain.shape[0]
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (d,))
    axes = [np.linspace(lo, hi, int(r)) for (lo, hi), r in zip(domain, res)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def brute_force_optimum(problem, resolution):
    """Exhaustive grid search for the best feasible point (``g <= 0``).

    Ties go to the lexicographically first grid node.
    """
    X = grid_points(problem.domain, resolution)
    obj, g = problem.evaluate_many(X)
    feasible = np.all(g <= 0.0, axis=1) if g.size else np.ones(len(X), dtype=bool)
    if not feasible.any():
        raise StateError(f"{problem.name}: no feasible grid node at resolution {resolution}")
    masked = np.where(feasible, obj, np.inf)
    k = int(np.argmin(masked))
    return X[k], float(obj[k])


_REGISTRY = {}


def register(factory, name=None):
    """Make a problem available by name. ``factory`` is a zero-argument callable."""
    _REGISTRY[name or factory().name] = factory
    return factory


def get_problem(name):
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise InvalidArgumentError(
            f"unknown problem {name!r}; known: {', '.join(sorted(_REGISTRY))}"
        ) from None


def list_problems():
    return {name: factory().description for name, factory in sorted(_REGISTRY.items())}


register(Parabola1D)
register(ConstrainedQuadratic2D)
register(VcsSurrogate)
