"""Gaussian process regression with an anisotropic RBF kernel.

A :class:`GaussianProcess` is an immutable value: :meth:`GaussianProcess.fit`
returns a new, fitted instance and never mutates the receiver, so a fitted
model can be queried from several threads at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.optimize import minimize_scalar

from .exceptions import InvalidArgumentError, NumericalError, StateError

__all__ = [
    "RbfKernel",
    "GaussianProcess",
    "kernel_eval",
    "fit_hyperparameters",
]

JITTER_START = 1e-8
JITTER_MAX = 1e-2


@dataclass(frozen=True)
class RbfKernel:
    """Squared-exponential kernel with one lengthscale per input dimension.

    ``k(a, b) = signal_variance * exp(-0.5 * sum(((a - b) / lengthscales)**2))``
    """

    signal_variance: float
    lengthscales: tuple

    def __post_init__(self):
        ls = tuple(float(v) for v in np.atleast_1d(self.lengthscales))
        object.__setattr__(self, "lengthscales", ls)
        object.__setattr__(self, "signal_variance", float(self.signal_variance))
        if not self.signal_variance > 0:
            raise InvalidArgumentError("signal_variance must be positive")
        if not ls or any(not v > 0 for v in ls):
            raise InvalidArgumentError("every lengthscale must be positive")

    @property
    def dim(self):
        return len(self.lengthscales)

    def __call__(self, A, B):
        """Cross-covariance matrix between the rows of ``A`` and ``B``."""
        A = _as_points(A, self.dim)
        B = _as_points(B, self.dim)
        ls = np.asarray(self.lengthscales)
        diff = (A[:, None, :] - B[None, :, :]) / ls
        return self.signal_variance * np.exp(-0.5 * np.sum(diff * diff, axis=-1))

    def diag(self, A):
        A = _as_points(A, self.dim)
        return np.full(A.shape[0], self.signal_variance)


def _as_points(X, dim):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1) if X.size == dim else X.reshape(-1, 1)
    if X.ndim != 2 or X.shape[1] != dim:
        raise InvalidArgumentError(
            f"expected points of dimension {dim}, got array of shape {np.shape(X)}"
        )
    return X


def kernel_eval(k, a, b):
    """Evaluate ``k`` at a single pair of points."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != (k.dim,) or b.shape != (k.dim,):
        raise InvalidArgumentError(
            f"kernel has {k.dim} lengthscales but points have shapes {a.shape}, {b.shape}"
        )
    return float(k(a[None, :], b[None, :])[0, 0])


class GaussianProcess:
    """Exact GP regression model with a constant prior mean.

    Parameters
    ----------
    kernel : RbfKernel
    prior_mean : float
        Constant prior mean; observations are modelled as deviations from it.
    noise_variance : float
        Observation noise variance added to the Gram diagonal.
    domain : array_like of shape (d, 2), optional
        Box the training inputs must lie in. Also used to bound the
        lengthscale search of :func:`fit_hyperparameters`.
    """

    def __init__(self, kernel, prior_mean=0.0, noise_variance=1e-6, domain=None):
        if noise_variance < 0:
            raise InvalidArgumentError("noise_variance must be nonnegative")
        self.kernel = kernel
        self.prior_mean = float(prior_mean)
        self.noise_variance = float(noise_variance)
        self.domain = None if domain is None else np.asarray(domain, dtype=float)
        if self.domain is not None and self.domain.shape != (kernel.dim, 2):
            raise InvalidArgumentError("domain must have shape (dim, 2)")
        self.X = None
        self.y = None
        self.cholesky_factor = None
        self.jitter = None
        self._alpha = None

    @property
    def fitted(self):
        return self.cholesky_factor is not None

    @property
    def dim(self):
        return self.kernel.dim

    def with_params(self, kernel=None, prior_mean=None):
        """Unfitted copy with some settings replaced."""
        return GaussianProcess(
            kernel if kernel is not None else self.kernel,
            self.prior_mean if prior_mean is None else prior_mean,
            self.noise_variance,
            self.domain,
        )

    def fit(self, X, y):
        """Condition on data ``(X, y)`` and return the fitted model.

        The Gram matrix is regularized by ``noise_variance + jitter`` on the
        diagonal. ``jitter`` is 0 when that factorization is well conditioned
        (every squared Cholesky pivot above ``1e-8 * signal_variance``);
        otherwise it starts at ``1e-8 * signal_variance`` and grows by a factor
        10 up to ``1e-2 * signal_variance`` until the factorization succeeds,
        after which a :class:`NumericalError` is raised. Duplicate inputs with
        different targets are accepted: they trigger the jitter ladder and the
        posterior mean at the shared input is close to their average.
        """
        X = _as_points(X, self.dim)
        y = np.asarray(y, dtype=float).reshape(-1)
        if X.shape[0] == 0:
            raise InvalidArgumentError("cannot fit a GP on an empty data set")
        if y.shape[0] != X.shape[0]:
            raise InvalidArgumentError("X and y have different lengths")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise InvalidArgumentError("training data must be finite")
        if self.domain is not None:
            tol = 1e-9 * (self.domain[:, 1] - self.domain[:, 0] + 1.0)
            if np.any(X < self.domain[:, 0] - tol) or np.any(X > self.domain[:, 1] + tol):
                raise InvalidArgumentError("training point outside the domain box")

        K = self.kernel(X, X)
        sv = self.kernel.signal_variance
        eye = np.eye(len(X))
        # unjittered factor accepted only if every pivot is well above the jitter floor
        L = self._cholesky(K + self.noise_variance * eye)
        jitter = 0.0
        if L is None or np.min(np.diag(L)) ** 2 <= JITTER_START * sv:
            jitter = JITTER_START * sv
            while True:
                L = self._cholesky(K + (self.noise_variance + jitter) * eye)
                if L is not None:
                    break
                if jitter >= JITTER_MAX * sv * (1 - 1e-12):
                    raise NumericalError(
                        f"Gram matrix not positive definite with jitter {jitter:.3g}",
                        jitter=jitter,
                    )
                jitter = min(jitter * 10.0, JITTER_MAX * sv)

        new = self.with_params()
        new.X = X.copy()
        new.y = y.copy()
        new.cholesky_factor = L
        new.jitter = jitter
        new._alpha = linalg.cho_solve((L, True), y - self.prior_mean, check_finite=False)
        return new

    @staticmethod
    def _cholesky(A):
        try:
            L = linalg.cholesky(A, lower=True, check_finite=False)
        except linalg.LinAlgError:
            return None
        return L if np.all(np.isfinite(L)) else None

    def regularized_gram(self):
        self._check_fitted()
        n = len(self.X)
        return self.kernel(self.X, self.X) + (self.noise_variance + self.jitter) * np.eye(n)

    def predict(self, Xq):
        """Posterior mean and standard deviation at the rows of ``Xq``."""
        self._check_fitted()
        Xq = _as_points(Xq, self.dim)
        Ks = self.kernel(self.X, Xq)
        mean = Ks.T @ self._alpha + self.prior_mean
        v = linalg.solve_triangular(self.cholesky_factor, Ks, lower=True, check_finite=False)
        var = self.kernel.signal_variance - np.sum(v * v, axis=0)
        return mean, np.sqrt(np.maximum(var, 0.0))

    def posterior(self, query):
        """Posterior ``(mean, sd)`` at a single point."""
        mean, sd = self.predict(np.atleast_1d(np.asarray(query, dtype=float)).reshape(1, -1))
        return float(mean[0]), float(sd[0])

    def log_marginal_likelihood(self):
        self._check_fitted()
        n = len(self.y)
        resid = self.y - self.prior_mean
        return float(
            -0.5 * resid @ self._alpha
            - np.sum(np.log(np.diag(self.cholesky_factor)))
            - 0.5 * n * math.log(2.0 * math.pi)
        )

    def _check_fitted(self):
        if not self.fitted:
            raise StateError("GaussianProcess has not been fitted")

    def __repr__(self):
        n = 0 if self.X is None else len(self.X)
        return (
            f"GaussianProcess(kernel={self.kernel!r}, prior_mean={self.prior_mean:g}, "
            f"noise_variance={self.noise_variance:g}, n={n})"
        )


def _lml(gp, log_params):
    kernel = RbfKernel(math.exp(log_params[0]), tuple(np.exp(log_params[1:])))
    try:
        return gp.with_params(kernel=kernel).fit(gp.X, gp.y).log_marginal_likelihood()
    except (NumericalError, FloatingPointError, ValueError):
        return -math.inf


def fit_hyperparameters(gp, grid_size=7, sweeps=3):
    """Maximize the log marginal likelihood over kernel hyperparameters.

    A coarse log-spaced grid over (signal variance, common lengthscale) picks
    a starting point, which is then refined by bounded coordinate-wise
    searches over the log signal variance and each log lengthscale. The
    returned model never has a lower log marginal likelihood than ``gp``;
    if nothing better is found, ``gp`` itself is returned.

    Search bounds: signal variance in ``[1e-6, 1e2 * max(var, 1e-6)]`` where
    ``var`` is the mean squared deviation of the targets from the prior mean;
    lengthscales in ``[0.01, 10]`` times the domain width (or the data range
    when no domain is set).
    """
    if not gp.fitted:
        raise StateError("fit_hyperparameters needs a fitted GP")
    if len(gp.X) < 3:
        raise StateError("fit_hyperparameters needs at least 3 data points")

    resid = gp.y - gp.prior_mean
    scale = max(float(np.mean(resid**2)), 1e-6)
    sv_bounds = (math.log(1e-6), math.log(1e2 * scale))
    if gp.domain is not None:
        width = gp.domain[:, 1] - gp.domain[:, 0]
    else:
        width = np.ptp(gp.X, axis=0)
    width = np.where(width > 0, width, 1.0)
    ls_bounds = [(math.log(0.01 * w), math.log(10.0 * w)) for w in width]

    best_lml = gp.log_marginal_likelihood()
    current = np.concatenate(
        [[math.log(gp.kernel.signal_variance)], np.log(gp.kernel.lengthscales)]
    )
    best = current.copy()

    for a in np.linspace(*sv_bounds, grid_size):
        for frac in np.linspace(0.0, 1.0, grid_size):
            cand = np.concatenate(
                [[a], [lo + frac * (hi - lo) for lo, hi in ls_bounds]]
            )
            val = _lml(gp, cand)
            if val > best_lml:
                best_lml, best = val, cand

    bounds = [sv_bounds] + ls_bounds
    for _ in range(sweeps):
        improved = False
        for j, (lo, hi) in enumerate(bounds):
            def neg(v, j=j):
                cand = best.copy()
                cand[j] = v
                return -_lml(gp, cand)

            res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-3})
            if np.isfinite(res.fun) and -res.fun > best_lml + 1e-12:
                best = best.copy()
                best[j] = res.x
                best_lml = -res.fun
                improved = True
        if not improved:
            break

    if np.array_equal(best, current):
        return gp
    kernel = RbfKernel(math.exp(best[0]), tuple(np.exp(best[1:])))
    try:
        return gp.with_params(kernel=kernel).fit(gp.X, gp.y)
    except NumericalError:
        return gp
