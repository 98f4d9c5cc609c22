"""
Plugging in your own black box
==============================

Any object following the ``BlackBoxProblem`` contract can be optimized.
Here a two-parameter "controller" is tuned: the objective is a tracking
error and the constraint keeps the overshoot below 0.2. Registering the
problem makes it available to config files by name.
"""

import numpy as np

from vabo import BlackBoxProblem, VaboConfig, register, run
from vabo.gp import RbfKernel
from vabo.problems import GpDefaults


class ToyController(BlackBoxProblem):
    name = "toy-controller"
    description = "tracking error vs. overshoot <= 0.2 for gains (kp, ki)"
    domain = np.array([[0.1, 4.0], [0.0, 2.0]])
    n_constraints = 1
    initial_safe_points = np.array([[0.5, 0.2]])
    gp_defaults = GpDefaults(RbfKernel(1.0, (0.8, 0.5)), (RbfKernel(0.1, (0.8, 0.5)),))

    def _evaluate(self, theta):
        kp, ki = theta
        error = 1.0 / (1.0 + kp) + 0.3 / (0.1 + ki) * 0.1 + 0.05 * kp
        overshoot = 0.08 * kp + 0.25 * ki ** 2
        return error, (overshoot - 0.2,)


register(ToyController)

trace = run(ToyController(), VaboConfig(max_iterations=15, budgets=(0.05,), seed=0))
theta, value = trace.final_incumbent
print(f"best gains kp={theta[0]:.2f} ki={theta[1]:.2f}, error {value:.4f}")
print("violation cost spent:", round(trace.total_spent[0], 4), "of 0.05")
print("termination:", trace.termination)
