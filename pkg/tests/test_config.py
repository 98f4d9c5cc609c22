import math

import pytest

from vabo import ConfigError
from vabo.config import ExperimentConfig, validate_config
from vabo.optimizer import GridSolver, MultistartSolver


def errors_of(text):
    with pytest.raises(ConfigError) as info:
        validate_config(text)
    return info.value.errors


def test_empty_file_gives_defaults():
    cfg = validate_config("")
    assert cfg == ExperimentConfig()
    assert cfg.problem == "vcs"
    assert cfg.iterations == 20 and cfg.budgets == (0.0, 10.0, 20.0) and cfg.beta0 == 1.0
    assert cfg.cost.kind == "quadratic"
    assert cfg.seeds == tuple(range(10))


def test_delta_out_of_range_names_delta():
    errs = errors_of("delta: 1.5")
    assert len(errs) == 1 and errs[0].startswith("delta")


def test_negative_budget_rejected():
    assert any(e.startswith("budgets") for e in errors_of("budgets: [-1]"))


def test_all_errors_reported_together():
    errs = errors_of("delta: 0\nbudgets: [-1]\niterations: 0\nbogus: 1\n")
    keys = {e.split(":")[0] for e in errs}
    assert {"delta", "budgets", "iterations", "bogus"} <= keys


def test_unknown_nested_key_named():
    errs = errors_of("solver:\n  kind: grid\n  resolutoin: 5\n")
    assert any("solver.resolutoin" in e for e in errs)


def test_syntax_error_has_position():
    errs = errors_of("budgets: [1, 2\niterations: 5\n")
    assert len(errs) == 1
    assert "line" in errs[0] and "column" in errs[0]


def test_full_config():
    text = """
problem: quadratic-2d
algorithms: [vabo, cbo]
budgets: [5, .inf]
iterations: 12
delta: 0.1
beta0: 0.5
seeds: [3, 7]
cost: {kind: linear, scale: 2}
solver: {kind: grid, resolution: [10, 12]}
safe_bo: {confidence_multiplier: 3}
initial: {points: [[0.9, 0.95]], random: 1}
gp:
  noise_variance: 1.0e-5
  refit: true
  objective: {signal_variance: 2, lengthscales: [0.3, 0.3]}
  constraints: [{signal_variance: 9, lengthscales: [0.5, 0.5]}]
noise: {objective_sd: 0.01}
output: out-dir
"""
    cfg = validate_config(text)
    assert cfg.problem == "quadratic-2d"
    assert cfg.algorithms == ("vabo", "cbo")
    assert cfg.budgets == (5.0, math.inf)
    assert cfg.seeds == (3, 7)
    assert cfg.cost.kind == "linear" and cfg.cost.scale == 2.0
    assert cfg.solver == GridSolver((10, 12))
    assert cfg.safe_bo.confidence_multiplier == 3.0
    assert cfg.initial_points == ((0.9, 0.95),) and cfg.initial_random == 1
    assert cfg.refit_hyperparameters and cfg.noise_variance == 1e-5
    assert cfg.objective_kernel.lengthscales == (0.3, 0.3)
    assert cfg.objective_noise_sd == 0.01 and cfg.output == "out-dir"
    rc = cfg.run_config(5.0, 3, 1)
    assert rc.budgets == (5.0,) and rc.seed == 3 and rc.max_iterations == 12


def test_multistart_and_table_cost():
    cfg = validate_config(
        "solver: {kind: multistart, n_starts: 5, local_budget: 50}\n"
        "cost: {kind: table, breakpoints: [0, 1, 2], values: [0, 1, 3]}\n"
    )
    assert cfg.solver == MultistartSolver(5, 50)
    assert cfg.cost.values == (0.0, 1.0, 3.0)


@pytest.mark.parametrize(
    "text, key",
    [
        ("problem: nowhere", "problem"),
        ("algorithms: [vabo, sgd]", "algorithms"),
        ("seeds: 0", "seeds"),
        ("seeds: [1.5]", "seeds"),
        ("beta0: 0", "beta0"),
        ("cost: {kind: cubic}", "cost"),
        ("solver: {kind: random}", "solver.kind"),
        ("safe_bo: {confidence_multiplier: -1}", "safe_bo.confidence_multiplier"),
        ("initial: {points: [[1, 2]]}", "initial.points"),
        ("initial: {points: [[100, 350, 600]]}", "initial.points"),
        ("gp: {refit: maybe}", "gp.refit"),
        ("gp: {constraints: []}", "gp.constraints"),
        ("noise: {objective_sd: -1}", "noise.objective_sd"),
        ("output: 5", "output"),
        ("iterations: ten", "iterations"),
        ("- just\n- a list\n", "top level"),
    ],
)
def test_invalid_values(text, key):
    assert any(e.startswith(key) for e in errors_of(text))
