"""Violation-aware Bayesian optimization.

Black-box minimization under unknown constraints, spending a prescribed
budget of constraint-violation cost to converge faster while staying within
budget with high probability.
"""
from .acquisition import (
    AcquisitionContext,
    budget_constraint_probability,
    cei,
    expected_improvement,
    feasibility_probability,
    is_chance_feasible,
)
from .baselines import SafeBoSettings, run_cbo, run_safe_bo
from .exceptions import (
    ConfigError,
    InvalidArgumentError,
    NumericalError,
    StateError,
    VaboError,
)
from .gp import GaussianProcess, RbfKernel, fit_hyperparameters, kernel_eval
from .optimizer import (
    GridSolver,
    MultistartSolver,
    RunTrace,
    VaboConfig,
    beta_schedule,
    epsilon_schedule,
    incumbent,
    run,
    solve_auxiliary,
)
from .problems import (
    BlackBoxProblem,
    ConstrainedQuadratic2D,
    Parabola1D,
    VcsSurrogate,
    brute_force_optimum,
    get_problem,
    list_problems,
    register,
)
from .violation import ViolationAccount, ViolationCost, charge, inverse_cost, violation_cost

__version__ = "0.1.0"
