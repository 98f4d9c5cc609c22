import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vabo import (
    AcquisitionContext,
    BlackBoxProblem,
    GaussianProcess,
    GridSolver,
    InvalidArgumentError,
    MultistartSolver,
    Parabola1D,
    RbfKernel,
    StateError,
    VaboConfig,
    beta_schedule,
    budget_constraint_probability,
    cei,
    epsilon_schedule,
    incumbent,
    run,
    solve_auxiliary,
)
from vabo.optimizer import AuxiliarySolution, Observation, default_solver
from vabo.problems import ConstrainedQuadratic2D, grid_points
from vabo.violation import linear, quadratic


class ConstGP:
    def __init__(self, mean, sd, dim):
        self.mean, self.sd, self.dim = mean, sd, dim

    def predict(self, X):
        n = np.atleast_2d(X).shape[0]
        return np.full(n, float(self.mean)), np.full(n, float(self.sd))


def obs(theta, objective, g):
    return Observation(tuple(np.atleast_1d(theta)), objective, tuple(np.atleast_1d(g)))


# schedules

def test_epsilon_single_step():
    assert epsilon_schedule(0.1, 1) == [pytest.approx(0.1, abs=1e-15)]


@pytest.mark.parametrize("delta, T, expected", [(0.1, 10, 1 - 0.9**0.1), (0.5, 2, 1 - math.sqrt(0.5))])
def test_epsilon_closed_form(delta, T, expected):
    eps = epsilon_schedule(delta, T)
    assert len(eps) == T
    assert eps[0] == pytest.approx(expected, abs=1e-15)
    assert abs(math.prod(1 - e for e in eps) - (1 - delta)) <= 1e-12


def test_epsilon_known_values():
    assert epsilon_schedule(0.1, 10)[0] == pytest.approx(0.010481, abs=1e-6)
    assert epsilon_schedule(0.5, 2)[0] == pytest.approx(0.292893, abs=1e-6)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 1 - 1e-6), st.integers(1, 500))
def test_epsilon_product_identity(delta, T):
    eps = epsilon_schedule(delta, T)
    assert all(0 < e < 1 for e in eps)
    assert abs(math.prod(1 - e for e in eps) - (1 - delta)) <= 1e-12


@pytest.mark.parametrize("delta", [0.0, 1.0, -0.1, 1.5])
def test_epsilon_rejects_bad_delta(delta):
    with pytest.raises(InvalidArgumentError):
        epsilon_schedule(delta, 5)


def test_beta_schedule_examples():
    assert all(beta_schedule(1.0, 20, t) == 1.0 for t in range(1, 21))
    assert beta_schedule(0.1, 20, 1) == 0.1
    assert beta_schedule(0.1, 20, 20) == 1.0
    with pytest.raises(InvalidArgumentError):
        beta_schedule(0.1, 20, 21)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 1.0), st.integers(1, 100), st.data())
def test_beta_schedule_range(beta0, T, data):
    t = data.draw(st.integers(1, T))
    b = beta_schedule(beta0, T, t)
    assert beta0 <= b <= 1.0 and beta_schedule(beta0, T, T) == 1.0


# incumbent

def test_incumbent_examples():
    init = [obs(0.0, 5.0, -1.0)]
    assert incumbent([], init)[1] == 5.0
    hist = [obs(1.0, 3.0, 0.5)]
    assert incumbent(hist, init)[1] == 5.0
    hist.append(obs(2.0, 4.0, 0.0))
    theta, value = incumbent(hist, init)
    assert value == 4.0 and theta.tolist() == [2.0]


def test_incumbent_ties_go_to_earliest():
    theta, _ = incumbent([obs(1.0, 5.0, -1.0)], [obs(0.0, 5.0, -1.0)])
    assert theta.tolist() == [0.0]


def test_incumbent_without_feasible_point():
    with pytest.raises(StateError, match="initial safe set"):
        incumbent([obs(1.0, 3.0, 0.5)], [obs(0.0, 1.0, 2.0)])


# auxiliary problem

def ctx_const(dim=1, g_mean=-5.0, g_sd=1.0, budget=10.0, eps=0.05):
    return AcquisitionContext(
        ConstGP(0.0, 1.0, dim), (ConstGP(g_mean, g_sd, dim),), 0.0, (budget,), (1.0,), eps,
        (quadratic(),),
    )


def peaked_context():
    k = RbfKernel(1.0, (0.25, 0.25))
    X = np.array([[0.1, 0.1], [0.9, 0.1], [0.1, 0.9], [0.9, 0.9], [0.45, 0.6]])
    y = np.array([2.0, 2.0, 2.0, 2.0, 0.0])
    obj = GaussianProcess(k, prior_mean=1.0).fit(X, y)
    con = GaussianProcess(k).fit(X, -np.ones(5))
    return AcquisitionContext(obj, (con,), 0.0, (1e6,), (1.0,), 1 - 1e-9, (quadratic(),))


def test_grid_solution_near_fine_grid_peak():
    ctx = peaked_context()
    dom = np.array([[0.0, 1.0], [0.0, 1.0]])
    sol = solve_auxiliary(ctx, dom, GridSolver(25))
    fine = grid_points(dom, 241)
    peak = fine[np.argmax(cei(ctx, fine))]
    assert not sol.chance_set_empty
    assert np.all(np.abs(sol.theta - peak) <= 1.0 / 24 + 1e-12)


def test_grid_fallback_when_nothing_chance_feasible():
    k = RbfKernel(1.0, (0.3,))
    X = np.array([[0.0], [0.5], [1.0]])
    obj = GaussianProcess(k).fit(X, [0.0, 0.0, 0.0])
    con = GaussianProcess(k).fit(X, [3.0, 1.0, 2.0])
    ctx = AcquisitionContext(obj, (con,), 0.0, (0.0,), (1.0,), 0.05, (quadratic(),))
    dom = np.array([[0.0, 1.0]])
    sol = solve_auxiliary(ctx, dom, GridSolver(25))
    nodes = grid_points(dom, 25)
    assert sol.chance_set_empty
    assert sol.theta[0] == nodes[np.argmax(budget_constraint_probability(ctx, nodes))][0]


def test_grid_tie_break_is_lexicographic():
    sol = solve_auxiliary(ctx_const(dim=2), np.array([[0.0, 1.0], [2.0, 3.0]]), GridSolver(5))
    assert sol.theta.tolist() == [0.0, 2.0]


def test_grid_skips_chance_infeasible_nodes():
    k = RbfKernel(1.0, (0.2,))
    X = np.array([[0.0], [1.0]])
    obj = GaussianProcess(k).fit(X, [0.0, -1.0])
    con = GaussianProcess(k).fit(X, [-3.0, 5.0])
    ctx = AcquisitionContext(obj, (con,), 0.0, (0.0,), (1.0,), 0.05, (quadratic(),))
    sol = solve_auxiliary(ctx, np.array([[0.0, 1.0]]), GridSolver(21))
    assert not sol.chance_set_empty
    assert budget_constraint_probability(ctx, sol.theta) >= 0.95


def test_multistart_finds_peak_and_respects_chance_set():
    ctx = peaked_context()
    dom = np.array([[0.0, 1.0], [0.0, 1.0]])
    sol = solve_auxiliary(ctx, dom, MultistartSolver(n_starts=8), np.random.default_rng(0))
    fine = grid_points(dom, 241)
    best = cei(ctx, fine).max()
    assert sol.acquisition >= 0.99 * best


def test_multistart_fallback():
    ctx = ctx_const(g_mean=5.0, g_sd=1.0, budget=0.0)
    sol = solve_auxiliary(ctx, np.array([[0.0, 1.0]]), MultistartSolver(n_starts=4), np.random.default_rng(0))
    assert sol.chance_set_empty


def test_default_solver_by_dimension():
    assert default_solver(3) == GridSolver(25)
    assert isinstance(default_solver(4), MultistartSolver)


# config

@pytest.mark.parametrize(
    "kwargs",
    [
        {"max_iterations": 0},
        {"delta": 0.0},
        {"delta": 1.0},
        {"beta0": 0.0},
        {"beta0": 1.5},
        {"budgets": (-1.0,)},
        {"budgets": (1.0, 2.0)},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(InvalidArgumentError):
        VaboConfig(**kwargs)


# run

def quad_config(**kw):
    base = dict(max_iterations=8, budgets=(10.0,), n_random_initial=2, seed=3, solver=GridSolver(15))
    base.update(kw)
    return VaboConfig(**base)


def test_run_trace_invariants():
    problem = ConstrainedQuadratic2D()
    trace = run(problem, quad_config())
    assert trace.termination in ("iterations_exhausted", "budget_exhausted")
    assert len(trace.initial) == 3
    assert len(trace.iterations) <= 8
    init_best = min(o.objective for o in trace.initial)
    values = [r.incumbent_value for r in trace.iterations]
    spent = [r.spent[0] for r in trace.iterations]
    assert values[0] <= init_best
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert all(b >= a for a, b in zip(spent, spent[1:]))
    for r in trace.iterations:
        obj, g = problem.evaluate(r.theta)
        assert (obj, tuple(g)) == (r.objective, r.constraints)
        assert r.remaining[0] == pytest.approx(10.0 - r.spent[0])


def test_run_is_deterministic():
    a = run(ConstrainedQuadratic2D(), quad_config(seed=11))
    b = run(ConstrainedQuadratic2D(), quad_config(seed=11))
    assert a.iterations == b.iterations and a.initial == b.initial


def test_infinite_budget_matches_cbo():
    a = run(ConstrainedQuadratic2D(), quad_config(budgets=(math.inf,)))
    b = run(ConstrainedQuadratic2D(), quad_config(budgets=(math.inf,)), algorithm="cbo")
    assert a.iterations == b.iterations


def test_budget_exhaustion_stops_run():
    def reckless(ctx, domain, rng):
        return AuxiliarySolution(np.array([-2.0]), 0.0, 0.0, False)

    trace = run(Parabola1D(), VaboConfig(max_iterations=5, budgets=(4.0,)), selector=reckless)
    # g(-2) = 3 costs 9 > 4
    assert trace.termination == "budget_exhausted"
    assert len(trace.iterations) == 1
    assert trace.exhausted_constraints == (0,)
    assert trace.iterations[0].remaining == (-5.0,)


def test_exact_exhaustion_keeps_going():
    def boundary(ctx, domain, rng):
        return AuxiliarySolution(np.array([-1.0]), 0.0, 0.0, False)

    trace = run(Parabola1D(), VaboConfig(max_iterations=3, budgets=(4.0,), cost_fns=(linear(2.0),)),
                selector=boundary)
    # g(-1) = 2, linear cost 4 per step: exactly zero left after step 1, negative after step 2
    assert [r.remaining[0] for r in trace.iterations] == [0.0, -4.0]
    assert trace.termination == "budget_exhausted"


def test_cbo_ignores_budget():
    def reckless(ctx, domain, rng):
        return AuxiliarySolution(np.array([-2.0]), 0.0, 0.0, False)

    trace = run(Parabola1D(), VaboConfig(max_iterations=3, budgets=(4.0,)), algorithm="cbo", selector=reckless)
    assert trace.termination == "iterations_exhausted" and len(trace.iterations) == 3


def test_evaluation_failure_returns_partial_trace():
    calls = {"n": 0}

    def objective(x):
        calls["n"] += 1
        if calls["n"] > 3:
            raise RuntimeError("simulator crashed")
        return float(x[0] ** 2)

    p = BlackBoxProblem.from_functions("flaky", [[-2.0, 2.0]], objective, lambda x: (1.0 - x[0],), [[1.8]])
    trace = run(p, VaboConfig(max_iterations=10, budgets=(10.0,)))
    assert trace.termination == "evaluation_failure"
    assert "simulator crashed" in trace.error
    assert len(trace.iterations) == 2


def test_infeasible_initial_set_warns():
    p = BlackBoxProblem.from_functions("bad", [[-2.0, 2.0]], lambda x: float(x[0] ** 2),
                                       lambda x: (1.0 - x[0],), [[0.0]])
    with pytest.warns(RuntimeWarning, match="safe initial set"):
        trace = run(p, VaboConfig(max_iterations=2, budgets=(100.0,)))
    assert len(trace.iterations) >= 1


def test_budget_count_must_match_problem():
    with pytest.raises(InvalidArgumentError):
        run(Parabola1D(), VaboConfig(budgets=(1.0, 1.0), cost_fns=(quadratic(), quadratic())))


def test_zero_budget_selections_satisfy_chance_constraint():
    for seed in range(3):
        trace = run(ConstrainedQuadratic2D(), quad_config(budgets=(0.0,), delta=0.01, seed=seed))
        for r in trace.iterations:
            if not r.chance_set_empty:
                assert r.probability >= 1 - r.epsilon


def test_multistart_run_in_four_dimensions():
    p = BlackBoxProblem.from_functions(
        "bowl-4d", [[0.0, 1.0]] * 4, lambda x: float(np.sum((x - 0.3) ** 2)),
        lambda x: (float(0.5 - np.sum(x)),), [[0.6, 0.6, 0.6, 0.6]],
    )
    cfg = VaboConfig(max_iterations=4, budgets=(1.0,), solver=MultistartSolver(n_starts=4, local_budget=40))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        trace = run(p, cfg)
    assert len(trace.iterations) >= 1
    assert trace.iterations[-1].incumbent_value <= 4 * 0.09
