"""
Gaussian process posterior on a 1-D function
============================================

Fit a GP to a handful of samples of ``sin``, look at the posterior mean and
standard deviation, then let the marginal likelihood pick the kernel.
"""

import numpy as np

from vabo import GaussianProcess, RbfKernel, fit_hyperparameters

# five noiseless samples of sin on [0, 6]
X = np.array([[0.3], [1.4], [2.2], [3.9], [5.5]])
y = np.sin(X[:, 0])

# a deliberately short lengthscale to start with
gp = GaussianProcess(RbfKernel(1.0, (0.3,)), noise_variance=1e-6, domain=[[0.0, 6.0]]).fit(X, y)

Q = np.linspace(0, 6, 7)[:, None]
mean, sd = gp.predict(Q)
for q, m, s in zip(Q[:, 0], mean, sd):
    print(f"x={q:.1f}  mean={m:+.3f}  sd={s:.3f}  true={np.sin(q):+.3f}")

# at a training point the posterior collapses onto the observation
print("at x=2.2:", gp.posterior([2.2]))

# maximize the log marginal likelihood over signal variance and lengthscale
tuned = fit_hyperparameters(gp)
print("lengthscale", gp.kernel.lengthscales, "->", tuned.kernel.lengthscales)
print("log marginal likelihood", round(gp.log_marginal_likelihood(), 3),
      "->", round(tuned.log_marginal_likelihood(), 3))
