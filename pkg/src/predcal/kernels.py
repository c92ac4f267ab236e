"""Matern-3/2 kernels, Gram matrices, and a grid RKHS-norm surrogate.

The kernel is K(x, y) = (1 + r/psi) * exp(-r/psi) with r the Euclidean
distance and psi > 0 the length scale.  Its reproducing-kernel Hilbert
space is norm-equivalent to a Sobolev space of order 2, which is the
smoothness the convergence-rate check relies on.

Gram matrices get a small diagonal jitter so that Cholesky succeeds even
for near-coincident designs; the jitter escalates by factors of 10 up to
a hard cap before giving up.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .linalg import (
    CholFactor,
    DimensionMismatch,
    NotPositiveDefinite,
    SymMatrix,
    cholesky,
    solve_spd,
)

__all__ = [
    "DEFAULT_JITTER",
    "MAX_JITTER",
    "KernelSpec",
    "GramMatrix",
    "kernel_eval",
    "kernel_cross",
    "gram",
    "rkhs_norm_sq_approx",
]

DEFAULT_JITTER = 1e-8
MAX_JITTER = 1e-4

_FAMILIES = ("matern32",)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family, length scale, and input dimension."""

    family: str
    psi: float
    dim: int

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not self.psi > 0:
            raise ValueError("length scale psi must be > 0")
        if self.dim < 1:
            raise ValueError("input dimension must be >= 1")

    @property
    def smoothness(self):
        """Sobolev order of the native space (2 for Matern-3/2)."""
        return 2.0


def _mat32(r, psi):
    q = r / psi
    return (1.0 + q) * np.exp(-q)


def kernel_eval(spec, x, y):
    """Evaluate K(x, y) for two single points of shape ``(dim,)``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.shape[0] != spec.dim or y.shape[0] != spec.dim:
        raise DimensionMismatch("point dimension does not match kernel spec")
    r = float(np.sqrt(np.sum((x - y) ** 2)))
    return float(_mat32(r, spec.psi))


def kernel_cross(spec, x, y):
    """Kernel matrix K(x_i, y_j) for two point sets, shapes (m,d) and (n,d)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if x.shape[1] != spec.dim or y.shape[1] != spec.dim:
        raise DimensionMismatch("point dimension does not match kernel spec")
    return _mat32(cdist(x, y), spec.psi)


@dataclass
class GramMatrix:
    """Jittered kernel matrix of a design, with its Cholesky factor."""

    sym: SymMatrix
    jitter: float
    points: np.ndarray
    chol: CholFactor = field(repr=False)

    @property
    def values(self):
        return self.sym.a

    @property
    def n(self):
        return self.sym.order


def gram(spec, points, jitter=DEFAULT_JITTER):
    """Build the kernel matrix of a design plus a diagonal jitter.

    If the jittered matrix fails to factor, the jitter escalates by
    factors of 10 (starting from ``DEFAULT_JITTER`` when 0 was requested)
    until ``MAX_JITTER``; past that the failure propagates.

    Raises
    ------
    NotPositiveDefinite
        If no jitter up to ``MAX_JITTER`` yields a factorizable matrix.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != spec.dim:
        raise DimensionMismatch("design dimension does not match kernel spec")
    if jitter < 0:
        raise ValueError("jitter must be >= 0")
    base = SymMatrix(kernel_cross(spec, points, points)).a
    n = base.shape[0]
    j = float(jitter)
    while True:
        sym = SymMatrix(base + j * np.eye(n))
        try:
            factor = cholesky(sym)
        except NotPositiveDefinite:
            nxt = DEFAULT_JITTER if j == 0 else j * 10.0
            if nxt > MAX_JITTER:
                raise NotPositiveDefinite(
                    f"Gram matrix not factorizable even at jitter {MAX_JITTER}"
                )
            j = nxt
            continue
        return GramMatrix(sym=sym, jitter=j, points=points, chol=factor)


def _unit_grid(dim, grid_size):
    """Uniform grid on [0,1]^dim with ``grid_size`` nodes per axis."""
    axes = [np.linspace(0.0, 1.0, grid_size) for _ in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.reshape(-1) for m in mesh])


def rkhs_norm_sq_approx(spec, g, grid_size, jitter=DEFAULT_JITTER):
    """Grid surrogate for the squared RKHS norm of a function.

    Evaluates ``g`` on a uniform grid G of the unit cube and returns the
    quadratic form g(G)^T (Sigma_G + jitter I)^{-1} g(G), the squared norm
    of the minimum-norm interpolant of g on G.  The value is a lower bound
    of the true squared norm and is nondecreasing under grid refinement.

    Parameters
    ----------
    spec : KernelSpec
    g : callable
        Maps an ``(m, dim)`` array of points to ``m`` values.
    grid_size : int
        Nodes per axis (the grid has ``grid_size ** dim`` points).
    """
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    pts = _unit_grid(spec.dim, grid_size)
    vals = np.asarray(g(pts), dtype=float).reshape(-1)
    if vals.shape[0] != pts.shape[0]:
        raise DimensionMismatch("g must return one value per grid point")
    gm = gram(spec, pts, jitter)
    w = solve_spd(gm.chol, vals)
    return float(vals @ w)
