"""
Violation costs, budgets and the chance constraint
==================================================

How a violation budget turns into a bound on how far a constraint may be
violated, and how that bound becomes a probability under the GP posterior.
"""

import math

from vabo import ViolationAccount, charge, inverse_cost, violation_cost
from vabo.acquisition import feasibility_probability
from vabo.violation import quadratic, table

c = quadratic()
print("c(2) =", violation_cost(c, 2.0), " c(-3) =", violation_cost(c, -3.0))

# the largest violation a remaining budget of 10 can pay for
print("c^-1(10) =", inverse_cost(c, 10.0), "=", math.sqrt(10.0))

# a cost with a plateau: every violation in [1, 2] costs 1, so c^-1(1) is 2
flat = table((0.0, 1.0, 2.0, 3.0), (0.0, 1.0, 1.0, 2.0))
print("plateau c^-1(1) =", inverse_cost(flat, 1.0))

# spend a budget of 10 on three observations
acct = ViolationAccount((10.0,), (c,))
for g in (-1.0, 2.0, 2.5):
    acct, exhausted = charge(acct, [g])
    print(f"g={g:+.1f}  spent={acct.spent[0]:.2f}  remaining={acct.remaining[0]:.2f}  exhausted={set(exhausted)}")

# with the constraint posterior N(0.5, 1) and 3.75 budget left, the chance a
# sample stays inside the budget is Pr(g <= c^-1(3.75)):
r = inverse_cost(c, 3.75)
print(f"Pr(g <= {r:.3f}) = {feasibility_probability(0.5, 1.0, r):.4f}")
