"""Kernel ridge regression for the model discrepancy, with GCV tuning.

Given data (X_i, Y_i) and computer-model values eta(X_i), the residuals
r_i = Y_i - eta(X_i) are smoothed by penalized least squares in the
kernel's Hilbert space:

    min_h  (1/n) sum_i (r_i - h(X_i))^2  +  lambda ||h||_H^2.

By the representer theorem the minimizer is h(x) = sum_i c_i K(X_i, x)
with coefficients solving (Sigma + n*lambda I) c = r, Sigma the Gram
matrix of the design.  The smoothing level is picked by generalized
cross-validation over a fixed grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .kernels import KernelSpec, gram, kernel_cross
from .linalg import cholesky, solve_spd

__all__ = [
    "Dataset",
    "DiscrepancyFit",
    "DegenerateTrace",
    "AllDegenerate",
    "DEFAULT_LAMBDA_GRID",
    "fit_ridge",
    "predict_discrepancy",
    "gcv_score",
    "select_lambda_gcv",
]

# 60 log-spaced smoothing levels spanning interpolation to heavy shrinkage.
DEFAULT_LAMBDA_GRID = np.logspace(-8.0, 1.0, 60)


class DegenerateTrace(Exception):
    """GCV denominator trace is numerically zero (lambda too small)."""


class AllDegenerate(Exception):
    """Every lambda in the grid produced a degenerate GCV denominator."""


@dataclass
class Dataset:
    """Design points in the unit cube and scalar responses.

    ``x`` is coerced to shape (n, d); a 1-d array is treated as n points
    in one dimension.  Coordinates must lie in [0, 1].
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        if x.ndim != 2:
            raise ValueError("x must be a 1-d or 2-d array")
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if y.shape[0] != x.shape[0]:
            raise ValueError("x and y lengths differ")
        if x.shape[0] < 1:
            raise ValueError("dataset must contain at least one point")
        if np.any(x < 0.0) or np.any(x > 1.0):
            raise ValueError("design coordinates must lie in [0, 1]")
        self.x = x
        self.y = y

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def d(self):
        return self.x.shape[1]


@dataclass
class DiscrepancyFit:
    """A fitted kernel expansion h(x) = sum_i coef_i K(train_x_i, x)."""

    coef: np.ndarray
    lam: float
    kernel: KernelSpec
    train_x: np.ndarray
    residual_y: np.ndarray


def _residuals(data, eta_at_x):
    if eta_at_x is None:
        return data.y.copy()
    eta = np.asarray(eta_at_x, dtype=float).reshape(-1)
    if eta.shape[0] != data.n:
        raise ValueError("eta_at_x must hold one value per design point")
    return data.y - eta


def fit_ridge(data, eta_at_x, kernel, lam, gram_matrix=None):
    """Fit the discrepancy expansion at a fixed smoothing level.

    Parameters
    ----------
    data : Dataset
    eta_at_x : array_like or None
        Computer-model values at the design points; None means zeros, in
        which case the fit smooths the responses themselves.
    kernel : KernelSpec
    lam : float
        Smoothing level, > 0.
    gram_matrix : GramMatrix, optional
        Precomputed Gram matrix of ``data.x`` (saves rebuilding it when
        several fits share one design).
    """
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    r = _residuals(data, eta_at_x)
    gm = gram_matrix if gram_matrix is not None else gram(kernel, data.x)
    n = data.n
    m = gm.values + n * lam * np.eye(n)
    coef = solve_spd(cholesky(m), r)
    return DiscrepancyFit(
        coef=coef, lam=float(lam), kernel=kernel, train_x=data.x, residual_y=r
    )


def predict_discrepancy(fit, x):
    """Evaluate the fitted expansion at one point ``(d,)`` or a batch ``(m, d)``."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    k = kernel_cross(fit.kernel, np.atleast_2d(x), fit.train_x)
    out = k @ fit.coef
    return float(out[0]) if single else out


def _gcv_parts(data, eta_at_x, kernel, lam, gram_matrix=None):
    """Shared solve for gcv_score/select: returns (score, tr(I - A))."""
    r = _residuals(data, eta_at_x)
    gm = gram_matrix if gram_matrix is not None else gram(kernel, data.x)
    n = data.n
    nlam = n * lam
    m = gm.values + nlam * np.eye(n)
    factor = cholesky(m)
    coef = solve_spd(factor, r)
    fitted = gm.values @ coef
    rss = float(np.sum((r - fitted) ** 2)) / n
    # tr(I - A) = n*lambda * tr(M^{-1}), with tr(M^{-1}) = ||L^{-1}||_F^2
    linv = solve_triangular(factor.l, np.eye(n), lower=True, check_finite=False)
    tr_resid = nlam * float(np.sum(linv * linv))
    return rss, tr_resid


def gcv_score(data, eta_at_x, kernel, lam, gram_matrix=None):
    """Generalized cross-validation score of one smoothing level.

    GCV(lambda) = [ (1/n) ||r - A r||^2 ] / [ (1/n) tr(I - A) ]^2 with
    A = Sigma (Sigma + n*lambda I)^{-1} the influence matrix.

    Raises
    ------
    DegenerateTrace
        If tr(I - A) <= 1e-12 * n, where the score is numerically
        meaningless.
    """
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    rss, tr_resid = _gcv_parts(data, eta_at_x, kernel, lam, gram_matrix)
    n = data.n
    if tr_resid <= 1e-12 * n:
        raise DegenerateTrace(f"tr(I - A) = {tr_resid:.3e} at lambda = {lam:.3e}")
    return rss / (tr_resid / n) ** 2


def select_lambda_gcv(data, eta_at_x, kernel, grid=None, gram_matrix=None):
    """Pick the smoothing level minimizing GCV over a grid.

    Ties are broken toward the larger lambda (more smoothing).  Grid
    values whose denominator trace degenerates are skipped.

    Raises
    ------
    AllDegenerate
        If every grid value degenerates.
    """
    if grid is None:
        grid = DEFAULT_LAMBDA_GRID
    grid = np.sort(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ValueError("lambda grid is empty")
    gm = gram_matrix if gram_matrix is not None else gram(kernel, data.x)
    best_lam = None
    best_score = np.inf
    for lam in grid:
        try:
            score = gcv_score(data, eta_at_x, kernel, float(lam), gram_matrix=gm)
        except DegenerateTrace:
            continue
        # ascending grid plus <= keeps the largest lambda among exact ties
        if score <= best_score:
            best_score = score
            best_lam = float(lam)
    if best_lam is None:
        raise AllDegenerate("no lambda in the grid has a usable GCV denominator")
    return best_lam
