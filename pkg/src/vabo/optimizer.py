"""The violation-aware BO loop and its schedules.

Each iteration fits independent GPs to the objective and every constraint,
maximizes constrained expected improvement over the points whose
probability of staying within a fraction ``beta_t`` of the remaining
violation budget is at least ``1 - epsilon_t``, evaluates the chosen point
and charges its realized violation cost. The run stops after ``T``
iterations or as soon as some budget turns negative.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .acquisition import (
    AcquisitionContext,
    _chance_ok,
    budget_constraint_probability,
    cei,
)
from .exceptions import InvalidArgumentError, StateError
from .gp import GaussianProcess, RbfKernel, fit_hyperparameters
from .problems import grid_points
from .violation import ViolationAccount, ViolationCost, charge

__all__ = [
    "GridSolver",
    "MultistartSolver",
    "VaboConfig",
    "Observation",
    "IterationRecord",
    "RunTrace",
    "AuxiliarySolution",
    "epsilon_schedule",
    "beta_schedule",
    "incumbent",
    "solve_auxiliary",
    "run",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSolver:
    resolution: object = 25

    kind = "grid"


@dataclass(frozen=True)
class MultistartSolver:
    n_starts: int = 20
    local_budget: int = 200
    initial_step: float = 0.1
    min_step: float = 1e-3

    kind = "multistart"


def default_solver(dim):
    return GridSolver(25) if dim <= 3 else MultistartSolver()


@dataclass(frozen=True)
class VaboConfig:
    """Settings of one optimization run.

    ``budgets`` and ``cost_fns`` have one entry per constraint. ``beta0`` is a
    scalar shared by all constraints or one value per constraint.
    ``initial_safe_points=None`` means the problem's nominal safe points;
    ``n_random_initial`` further points are drawn from the problem's known
    safe region with the run seed. ``objective_kernel`` and
    ``constraint_kernels`` default to the problem's suggestions.
    """

    max_iterations: int = 20
    delta: float = 0.05
    beta0: object = 1.0
    budgets: tuple = (10.0,)
    cost_fns: tuple = (ViolationCost("quadratic"),)
    domain: object = None
    initial_safe_points: object = None
    n_random_initial: int = 0
    solver: object = None
    seed: int = 0
    objective_kernel: RbfKernel = None
    constraint_kernels: tuple = None
    noise_variance: float = 1e-6
    refit_hyperparameters: bool = False

    def __post_init__(self):
        object.__setattr__(self, "budgets", tuple(float(b) for b in self.budgets))
        object.__setattr__(self, "cost_fns", tuple(self.cost_fns))
        if self.max_iterations < 1:
            raise InvalidArgumentError("max_iterations must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise InvalidArgumentError("delta must lie in (0, 1)")
        if len(self.budgets) != len(self.cost_fns):
            raise InvalidArgumentError("budgets and cost_fns must have the same length")
        if any(b < 0 or math.isnan(b) for b in self.budgets):
            raise InvalidArgumentError("budgets must be nonnegative")
        for b in np.atleast_1d(self.beta0):
            if not 0.0 < b <= 1.0:
                raise InvalidArgumentError("beta0 must lie in (0, 1]")

    def betas0(self, n):
        b = np.atleast_1d(np.asarray(self.beta0, dtype=float))
        if b.size == 1:
            return tuple(float(b[0]) for _ in range(n))
        if b.size != n:
            raise InvalidArgumentError("beta0 must be a scalar or one value per constraint")
        return tuple(float(v) for v in b)


@dataclass(frozen=True)
class Observation:
    theta: tuple
    objective: float
    constraints: tuple

    @property
    def feasible(self):
        return all(g <= 0.0 for g in self.constraints)


@dataclass(frozen=True)
class AuxiliarySolution:
    theta: np.ndarray
    acquisition: float
    probability: float
    chance_set_empty: bool
    upper_confidence: tuple = None


@dataclass(frozen=True)
class IterationRecord:
    t: int
    theta: tuple
    objective: float
    constraints: tuple
    incumbent_theta: tuple
    incumbent_value: float
    spent: tuple
    remaining: tuple
    chance_set_empty: bool
    acquisition: float
    probability: float
    beta: tuple
    epsilon: float
    upper_confidence: tuple = None


@dataclass
class RunTrace:
    """Log of one run.

    ``termination`` is ``"iterations_exhausted"``, ``"budget_exhausted"`` (with
    ``exhausted_constraints`` the 0-based indices whose budget went negative)
    or ``"evaluation_failure"`` (with ``error`` set).
    """

    algorithm: str
    problem: str
    seed: int
    budgets: tuple
    initial: list = field(default_factory=list)
    iterations: list = field(default_factory=list)
    termination: str = None
    exhausted_constraints: tuple = ()
    error: str = None

    @property
    def final_incumbent(self):
        if self.iterations:
            return self.iterations[-1].incumbent_theta, self.iterations[-1].incumbent_value
        obs = incumbent(self.initial, [])
        return tuple(obs[0]), obs[1]

    @property
    def total_spent(self):
        if self.iterations:
            return self.iterations[-1].spent
        return tuple(0.0 for _ in self.budgets)


def epsilon_schedule(delta, T):
    """Uniform per-step risk levels whose survival product is ``1 - delta``."""
    if not 0.0 < delta < 1.0:
        raise InvalidArgumentError("delta must lie in (0, 1)")
    if T < 1:
        raise InvalidArgumentError("T must be >= 1")
    eps = -math.expm1(math.log1p(-delta) / T)
    return [eps] * T


def beta_schedule(beta0, T, t):
    """Share of the remaining budget allowed at step ``t``: ``max(beta0, 1/(T-t+1))``."""
    if not 1 <= t <= T:
        raise InvalidArgumentError("need 1 <= t <= T")
    return max(float(beta0), 1.0 / (T - t + 1))


def incumbent(history, initial_evals):
    """Best feasible evaluated point.

    Feasibility uses the observed constraint values with ``g <= 0`` inclusive.
    Ties go to the earliest evaluation; the initial safe set counts as
    evaluated first.
    """
    best = None
    for obs in list(initial_evals) + list(history):
        if obs.feasible and (best is None or obs.objective < best.objective):
            best = obs
    if best is None:
        raise StateError(
            "no feasible point among the evaluations: the initial safe set "
            "assumption (every initial point satisfies g <= 0) does not hold"
        )
    return np.asarray(best.theta), best.objective


def _argmax_first(values):
    return int(np.argmax(values))


def solve_auxiliary(ctx, domain, solver, rng=None):
    """Maximize CEI over the chance-feasible part of the domain.

    Grid mode scores every node and returns the feasible node with the
    largest CEI, the lexicographically first among ties. Multistart mode runs
    a coordinate pattern search from ``n_starts`` uniform points, accepting
    only chance-feasible moves that strictly increase CEI. When no probed
    point is chance-feasible the probed point with the largest budget
    probability is returned and ``chance_set_empty`` is set.
    """
    domain = np.asarray(domain, dtype=float)
    if solver.kind == "grid":
        X = grid_points(domain, solver.resolution)
        prob = np.atleast_1d(budget_constraint_probability(ctx, X))
        ok = np.atleast_1d(_chance_ok(prob, ctx.epsilon))
        if not ok.any():
            k = _argmax_first(prob)
            return AuxiliarySolution(X[k], float(cei(ctx, X[k:k + 1])[0]), float(prob[k]), True)
        acq = np.atleast_1d(cei(ctx, X))
        k = _argmax_first(np.where(ok, acq, -np.inf))
        return AuxiliarySolution(X[k], float(acq[k]), float(prob[k]), False)
    if solver.kind == "multistart":
        return _multistart(ctx, domain, solver, rng or np.random.default_rng(0))
    raise InvalidArgumentError(f"unknown solver {solver!r}")


def _multistart(ctx, domain, solver, rng):
    lo, hi = domain[:, 0], domain[:, 1]
    width = hi - lo
    d = len(lo)
    starts = lo + width * rng.random((solver.n_starts, d))

    def score(X):
        X = np.atleast_2d(X)
        p = np.atleast_1d(budget_constraint_probability(ctx, X))
        a = np.atleast_1d(cei(ctx, X))
        return a, p

    a0, p0 = score(starts)
    ok0 = np.atleast_1d(_chance_ok(p0, ctx.epsilon))
    if not ok0.any():
        k = _argmax_first(p0)
        return AuxiliarySolution(starts[k], float(a0[k]), float(p0[k]), True)

    best_x, best_a, best_p = None, -np.inf, 0.0
    for i in np.flatnonzero(ok0):
        x, a, p = starts[i].copy(), a0[i], p0[i]
        step = solver.initial_step
        evals = 0
        while step >= solver.min_step and evals < solver.local_budget:
            moved = False
            for j in range(d):
                for sign in (1.0, -1.0):
                    cand = x.copy()
                    cand[j] = np.clip(cand[j] + sign * step * width[j], lo[j], hi[j])
                    if cand[j] == x[j]:
                        continue
                    ca, cp = score(cand)
                    evals += 1
                    if _chance_ok(cp[0], ctx.epsilon) and ca[0] > a:
                        x, a, p = cand, ca[0], cp[0]
                        moved = True
            if not moved:
                step *= 0.5
        if a > best_a:
            best_x, best_a, best_p = x, a, p
    return AuxiliarySolution(best_x, float(best_a), float(best_p), False)


def _kernels(problem, config):
    defaults = problem.gp_defaults
    obj = config.objective_kernel or (defaults.objective if defaults else None)
    cons = config.constraint_kernels or (defaults.constraints if defaults else None)
    if obj is None or cons is None:
        width = problem.domain[:, 1] - problem.domain[:, 0]
        fallback = RbfKernel(1.0, tuple(0.2 * width))
        obj = obj or fallback
        cons = cons or tuple(fallback for _ in range(problem.n_constraints))
    if len(cons) != problem.n_constraints:
        raise InvalidArgumentError("need one constraint kernel per constraint")
    return obj, tuple(cons)


def _fit_models(data, domain, kernels, config):
    X = np.array([o.theta for o in data])
    y = np.array([o.objective for o in data])
    G = np.array([o.constraints for o in data]).reshape(len(data), -1)
    obj_kernel, con_kernels = kernels
    obj_gp = GaussianProcess(obj_kernel, float(np.mean(y)), config.noise_variance, domain).fit(X, y)
    con_gps = [
        GaussianProcess(k, 0.0, config.noise_variance, domain).fit(X, G[:, i])
        for i, k in enumerate(con_kernels)
    ]
    if config.refit_hyperparameters and len(data) >= 3:
        obj_gp = fit_hyperparameters(obj_gp)
        con_gps = [fit_hyperparameters(gp) for gp in con_gps]
    return obj_gp, con_gps


def initial_points(problem, config, rng):
    pts = problem.initial_safe_points if config.initial_safe_points is None else config.initial_safe_points
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if config.n_random_initial:
        pts = np.vstack([pts, problem.sample_safe_points(rng, config.n_random_initial)])
    return pts


def run(problem, config, algorithm="vabo", selector=None):
    """Run violation-aware BO on ``problem`` and return the :class:`RunTrace`.

    ``selector`` replaces the auxiliary problem solver; it receives
    ``(ctx, domain, rng)`` and returns an :class:`AuxiliarySolution`. The
    baselines use it. Runs are deterministic given ``config.seed``.
    """
    domain = problem.domain if config.domain is None else np.asarray(config.domain, dtype=float)
    if domain.shape != (problem.dimension, 2):
        raise InvalidArgumentError("config domain does not match the problem dimension")
    N = problem.n_constraints
    if len(config.budgets) != N:
        raise InvalidArgumentError(f"{problem.name} has {N} constraints but {len(config.budgets)} budgets were given")
    solver = config.solver or default_solver(problem.dimension)
    rng = np.random.default_rng(config.seed)
    kernels = _kernels(problem, config)
    T = config.max_iterations
    eps = epsilon_schedule(config.delta, T)
    betas0 = config.betas0(N)
    chance = algorithm == "vabo"
    stop_on_budget = algorithm == "vabo"
    if selector is None:
        def selector(ctx, dom, rng):
            return solve_auxiliary(ctx, dom, solver, rng)

    trace = RunTrace(algorithm, problem.name, config.seed, config.budgets)
    for theta in initial_points(problem, config, rng):
        try:
            obj, g = problem.evaluate(theta)
        except Exception as exc:  # noqa: BLE001 - any black-box failure ends the run
            trace.termination = "evaluation_failure"
            trace.error = f"{type(exc).__name__}: {exc}"
            return trace
        trace.initial.append(Observation(tuple(theta), obj, tuple(g)))
    if not any(o.feasible for o in trace.initial):
        warnings.warn(
            f"{problem.name}: no initial point is feasible; the safe initial set assumption is violated",
            RuntimeWarning,
            stacklevel=2,
        )
    elif not all(o.feasible for o in trace.initial):
        warnings.warn(f"{problem.name}: some initial points violate the constraints",
                      RuntimeWarning, stacklevel=2)

    account = ViolationAccount(config.budgets, config.cost_fns)
    history = []
    for t in range(1, T + 1):
        data = trace.initial + history
        obj_gp, con_gps = _fit_models(data, domain, kernels, config)
        try:
            inc_theta, inc_value = incumbent(history, trace.initial)
        except StateError:
            # nothing feasible yet: measure improvement against the worst observation
            inc_value = max(o.objective for o in data)
        beta = tuple(beta_schedule(b0, T, t) for b0 in betas0)
        ctx = AcquisitionContext(
            obj_gp, con_gps, inc_value, account.remaining, beta, eps[t - 1],
            config.cost_fns, chance_constraint=chance,
        )
        sol = selector(ctx, domain, rng)
        theta = np.asarray(sol.theta, dtype=float)
        try:
            obj, g = problem.evaluate(theta)
        except Exception as exc:  # noqa: BLE001
            trace.termination = "evaluation_failure"
            trace.error = f"{type(exc).__name__}: {exc}"
            return trace
        obs = Observation(tuple(float(v) for v in theta), obj, tuple(float(v) for v in g))
        history.append(obs)
        account, exhausted = charge(account, g)
        try:
            inc_theta, inc_value = incumbent(history, trace.initial)
            inc_theta = tuple(float(v) for v in inc_theta)
        except StateError:
            inc_theta, inc_value = tuple(math.nan for _ in theta), math.nan
        trace.iterations.append(IterationRecord(
            t=t,
            theta=obs.theta,
            objective=obj,
            constraints=obs.constraints,
            incumbent_theta=inc_theta,
            incumbent_value=inc_value,
            spent=account.spent,
            remaining=account.remaining,
            chance_set_empty=sol.chance_set_empty,
            acquisition=sol.acquisition,
            probability=sol.probability,
            beta=beta,
            epsilon=eps[t - 1],
            upper_confidence=sol.upper_confidence,
        ))
        log.debug("%s t=%d theta=%s l=%.6g g=%s", algorithm, t, obs.theta, obj, obs.constraints)
        if stop_on_budget and exhausted:
            trace.termination = "budget_exhausted"
            trace.exhausted_constraints = tuple(sorted(exhausted))
            return trace
    trace.termination = "iterations_exhausted"
    return trace
