"""Bayesian view of calibration for models linear in the parameter.

For eta(x, theta) = sum_j theta_j h_j(x), place independent priors
theta ~ N(0, alpha I) and a Gaussian process prior with covariance
beta K on the discrepancy, with N(0, sigma2) observation noise.  The
posterior mean of the physical response at x is then

    E[zeta(x) | Y] = [ (alpha/beta) h(x)^T T^T + k(x)^T ]
                     [ (alpha/beta) T T^T + Sigma + n*lambda I ]^{-1} Y,

where T is the basis matrix at the design, k(x) the kernel vector, and
lambda = sigma2 / (n beta).  As alpha grows the parametric part becomes
unpenalized and the posterior mean converges to the partial-spline
predictor computed by :func:`partial_spline_limit`; the limit is always
evaluated through its own closed form, never by plugging in a huge alpha.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .kernels import gram, kernel_cross
from .linalg import SymMatrix, cholesky, solve_spd
from .regression import DiscrepancyFit, predict_discrepancy

__all__ = [
    "RankDeficientBasis",
    "LinearComputerModel",
    "BayesHyper",
    "posterior_mean",
    "partial_spline_limit",
    "verify_proposition_limit",
]


class RankDeficientBasis(Exception):
    """The basis matrix is numerically rank deficient at the design."""


@dataclass(frozen=True)
class LinearComputerModel:
    """A computer model that is a linear combination of fixed basis maps.

    Each basis function maps an (m, d) array of points to m values.
    """

    basis: Tuple[Callable, ...]

    def __post_init__(self):
        if len(self.basis) < 1:
            raise ValueError("at least one basis function is required")

    @property
    def p(self):
        return len(self.basis)

    def basis_matrix(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        cols = [np.asarray(h(x), dtype=float).reshape(-1) for h in self.basis]
        t = np.column_stack(cols)
        if t.shape[0] != x.shape[0]:
            raise ValueError("basis functions must return one value per point")
        return t


@dataclass(frozen=True)
class BayesHyper:
    """Prior scales: parameter variance, process variance, noise variance."""

    alpha: float
    beta: float
    sigma2: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError("alpha must be finite and > 0")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be > 0")

    def induced_lambda(self, n):
        """The ridge level sigma2 / (n beta) implied by the priors."""
        return self.sigma2 / (n * self.beta)


def posterior_mean(data, model, kernel, hyper, x):
    """Posterior mean of the physical response at one point or a batch."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)

    t = model.basis_matrix(data.x)
    gm = gram(kernel, data.x)
    n = data.n
    nlam = n * hyper.induced_lambda(n)  # = sigma2 / beta
    ratio = hyper.alpha / hyper.beta
    b = SymMatrix(ratio * (t @ t.T) + gm.values + nlam * np.eye(n))
    w = solve_spd(cholesky(b), data.y)

    h = model.basis_matrix(pts)
    k = kernel_cross(kernel, pts, data.x)
    out = ratio * (h @ (t.T @ w)) + k @ w
    return float(out[0]) if single else out


def partial_spline_limit(data, model, kernel, lam):
    """Partial-spline solution: unpenalized basis part plus kernel part.

    Solves, in closed form, the joint penalized least squares problem

        min_{theta, c} (1/n) ||Y - T theta - Sigma c||^2 + lam c^T Sigma c

    whose stationary equations give, with M = Sigma + n*lam I,

        theta_hat = (T^T M^{-1} T)^{-1} T^T M^{-1} Y,
        c         = M^{-1} (Y - T theta_hat).

    Returns
    -------
    (theta_hat, DiscrepancyFit)

    Raises
    ------
    RankDeficientBasis
        If T^T M^{-1} T has a numerically zero eigenvalue (below 1e-10).
    """
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    t = model.basis_matrix(data.x)
    gm = gram(kernel, data.x)
    n = data.n
    m = gm.values + n * lam * np.eye(n)
    factor = cholesky(m)
    w = solve_spd(factor, t)  # M^{-1} T, one solve per basis column
    g = SymMatrix(t.T @ w).a
    eigs = np.linalg.eigvalsh(g)
    if eigs[0] <= 1e-10:
        raise RankDeficientBasis(
            f"smallest eigenvalue of T^T M^-1 T is {eigs[0]:.3e}"
        )
    theta = np.linalg.solve(g, w.T @ data.y)
    resid = data.y - t @ theta
    coef = solve_spd(factor, resid)
    fit = DiscrepancyFit(
        coef=coef, lam=float(lam), kernel=kernel, train_x=data.x, residual_y=resid
    )
    return theta, fit


def verify_proposition_limit(data, model, kernel, alphas, beta, sigma2, test_points):
    """Deviation of the posterior mean from its diffuse-parameter limit.

    For each alpha in the increasing grid, computes the maximum absolute
    difference over ``test_points`` between the posterior mean and the
    partial-spline predictor at lambda = sigma2/(n beta).

    Returns
    -------
    ndarray
        One deviation per alpha; the sequence decreases toward zero as
        alpha grows.
    """
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size < 1:
        raise ValueError("alpha grid is empty")
    if np.any(np.diff(alphas) <= 0):
        raise ValueError("alpha grid must be strictly increasing")
    pts = np.atleast_2d(np.asarray(test_points, dtype=float))

    lam = sigma2 / (data.n * beta)
    theta, fit = partial_spline_limit(data, model, kernel, lam)
    limit = model.basis_matrix(pts) @ theta + predict_discrepancy(fit, pts)

    devs = np.empty(alphas.size)
    for i, alpha in enumerate(alphas):
        hyper = BayesHyper(alpha=float(alpha), beta=beta, sigma2=sigma2)
        post = posterior_mean(data, model, kernel, hyper, pts)
        devs[i] = float(np.max(np.abs(post - limit)))
    return devs
