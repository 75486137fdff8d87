"""Tyler shape depth, its bivariate elliptical closed form, and Tyler's M-estimator.

The depth of a shape ``V`` at location ``theta`` is the halfspace depth of the
origin with respect to the reduced sign vectors ``vech0(U U^T - I/k)``,
where ``U`` are the signs of the data standardized by ``V``.  For ``k = 2``
the reduced signs are planar and the depth is computed exactly.
"""

import io
from dataclasses import dataclass

import numpy as np

from .depthvalue import DepthValue
from .exceptions import ConvergenceError, DimensionError, DomainError, UnsupportedDimensionError
from .halfspace import DEFAULT_BUDGET, min_counts_2d, origin_count, tukey_median
from .spd import (
    ShapeMatrix,
    _signs,
    matrix_invsqrt,
    matrix_sqrt,
    normalize_to_shape,
    reduced_signs,
)
from .special import beta_cdf


def _check_data(data, theta=None):
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise DimensionError("data must be an (n, k) array")
    if X.shape[0] == 0:
        raise DomainError("empty data set")
    if not np.all(np.isfinite(X)):
        raise DomainError("data has non-finite entries")
    if theta is not None:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (X.shape[1],):
            raise DimensionError("theta and data dimensions disagree")
    return X, theta


def _check_shape(V, k):
    V = np.asarray(V, dtype=float)
    if V.shape != (k, k):
        raise DimensionError(f"shape is {V.shape}, data dimension is {k}")
    return V


def reduced_sign_cloud(data, theta, V):
    """Reduced signs ``vech0(U U^T - I/k)`` of the observations distinct from ``theta``.

    Observations at ``theta`` have no direction and never enter the depth
    count (they can always be left out of the infimizing halfspace), so they
    are dropped here; depth is still normalized by the full sample size.
    """
    X, theta = _check_data(data, theta)
    V = _check_shape(V, X.shape[1])
    Z = X - theta
    Z = Z[np.any(Z != 0.0, axis=1)]
    return reduced_signs(_signs(Z, matrix_invsqrt(V)))


def shape_depth_fixed_theta(data, theta, V, budget=DEFAULT_BUDGET):
    """Tyler shape depth of ``V`` at a specified location.

    Parameters
    ----------
    data : array_like, shape (n, k)
    theta : array_like, shape (k,)
    V : array_like or ShapeMatrix, shape (k, k)
        SPD matrix; only its direction matters, so the trace is not checked.
    budget : DirectionBudget
        Used only when ``k >= 3``.

    Returns
    -------
    DepthValue
        Exact for ``k = 2``.  Observations equal to ``theta`` count in the
        sample size but in no halfspace, so a sample with mass ``p`` at
        ``theta`` has depth at most ``1 - p``.
    """
    X, _ = _check_data(data)
    W = reduced_sign_cloud(X, theta, V)
    count = origin_count(W, budget) if len(W) else 0
    return DepthValue(count, len(X))


def shape_depth(data, V, budget=DEFAULT_BUDGET):
    """Tyler shape depth with the location replaced by the Tukey median."""
    X, _ = _check_data(data)
    theta = tukey_median(X, budget)
    return shape_depth_fixed_theta(X, theta, V, budget)


def depth_counts_k2(centered, shapes):
    """Exact depth counts of many bivariate shapes on the same centered data.

    Parameters
    ----------
    centered : ndarray, shape (n, 2)
        Observations minus the location.
    shapes : ndarray, shape (B, 2, 2)

    Returns
    -------
    ndarray of int, shape (B,)
    """
    Z = np.asarray(centered, dtype=float)
    Z = Z[np.any(Z != 0.0, axis=1)]
    shapes = np.asarray(shapes, dtype=float)
    out = np.zeros(len(shapes), dtype=int)
    if len(Z) == 0:
        return out
    step = max(1, 1_000_000 // max(len(Z), 1))
    for s in range(0, len(shapes), step):
        Vs = shapes[s:s + step]
        # Cholesky factor instead of the symmetric root: the signs change by a
        # rotation, which maps the reduced signs linearly and keeps the depth
        a = np.sqrt(Vs[:, 0, 0])
        b = Vs[:, 1, 0] / a
        c2 = Vs[:, 1, 1] - b * b
        if np.any(~(a > 0)) or np.any(~(c2 > 0)):
            raise DomainError("shape matrix is not positive definite")
        c = np.sqrt(c2)
        y1 = Z[None, :, 0] / a[:, None]
        y2 = (Z[None, :, 1] - b[:, None] * y1) / c[:, None]
        r2 = y1 * y1 + y2 * y2
        w1 = y1 * y2 / r2
        w2 = y2 * y2 / r2 - 0.5
        W = np.stack([w1, w2], axis=-1)
        out[s:s + step] = min_counts_2d(W)
    return out


def elliptical_depth_k2(V, model):
    """Population shape depth of ``V`` under a bivariate elliptical law.

    Parameters
    ----------
    V : array_like, shape (2, 2)
        Candidate SPD shape.
    model : EllipticalModel or array_like
        Elliptical model (its ``shape`` and ``atom_mass`` are used) or the
        true shape ``V0`` itself, in which case there is no atom.

    Returns
    -------
    float
        ``(1 - atom) * P(Y >= 1/2 + sqrt(1 - det M)/2)`` with ``Y ~ Beta(1/2, 1/2)``
        and ``M = 2 V0^{-1} V / tr(V0^{-1} V)``.
    """
    V = np.asarray(V, dtype=float)
    if hasattr(model, "shape") and not isinstance(model, np.ndarray):
        V0 = np.asarray(model.shape, dtype=float)
        atom = float(model.atom_mass)
    else:
        V0 = np.asarray(model, dtype=float)
        atom = 0.0
    if V.shape != (2, 2) or V0.shape != (2, 2):
        raise UnsupportedDimensionError("closed-form depth is only available for k = 2")
    matrix_sqrt(V)
    isq = matrix_invsqrt(V0)
    C = isq @ V @ isq
    M = 2.0 * C / np.trace(C)
    disc = max(0.0, 1.0 - float(np.linalg.det(M)))
    x = min(1.0, 0.5 + 0.5 * np.sqrt(disc))
    return (1.0 - atom) * (1.0 - beta_cdf(0.5, 0.5, x))


def max_depth_value(k, atom_mass=0.0):
    """Maximal elliptical shape depth ``(1 - atom) P(Y_k > 1/k)``, ``Y_k ~ Beta(1/2, (k-1)/2)``."""
    if k < 2:
        raise DomainError("k must be at least 2")
    if not 0.0 <= atom_mass < 1.0:
        raise DomainError("atom_mass must lie in [0, 1)")
    return (1.0 - atom_mass) * (1.0 - beta_cdf(0.5, 0.5 * (k - 1), 1.0 / k))


# -- contour grids -----------------------------------------------------------

def shape_from_ratio_corr(ratio, corr):
    """Bivariate shape with ``V22/V11 = ratio``, correlation ``corr`` and trace 2."""
    if not ratio > 0:
        raise DomainError("ratio must be positive")
    if not abs(corr) < 1:
        raise DomainError("correlation must lie in (-1, 1)")
    v11 = 2.0 / (1.0 + ratio)
    v22 = 2.0 * ratio / (1.0 + ratio)
    v12 = corr * np.sqrt(v11 * v22)
    return np.array([[v11, v12], [v12, v22]])


@dataclass
class ContourGrid:
    """Depth over a (ratio, correlation) grid of bivariate shapes.

    ``depth[i, j]`` is the depth of the shape with ratio ``ratio[i]`` and
    correlation ``corr[j]``.  ``counts`` and ``n`` are set for empirical grids.
    """

    ratio: np.ndarray
    corr: np.ndarray
    depth: np.ndarray
    counts: np.ndarray = None
    n: int = None

    def argmax(self):
        i, j = np.unravel_index(np.argmax(self.depth), self.depth.shape)
        return self.ratio[i], self.corr[j]

    def to_csv(self):
        buf = io.StringIO()
        buf.write("ratio,corr,depth\n")
        for i, r in enumerate(self.ratio):
            for j, c in enumerate(self.corr):
                if self.counts is not None:
                    val = repr(float(self.counts[i, j] / self.n))
                else:
                    val = f"{self.depth[i, j]:.12f}"
                buf.write(f"{float(r)!r},{float(c)!r},{val}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
        ratio = np.unique(rows[:, 0])
        corr = np.unique(rows[:, 1])
        depth = rows[:, 2].reshape(len(ratio), len(corr))
        return cls(ratio, corr, depth)


def grid_axes(resolution=(21, 21), ratio_range=(0.1, 10.0), corr_range=(-0.9, 0.9)):
    """Default Figure-style axes: log-spaced ratios, linear correlations."""
    n_ratio, n_corr = resolution
    lo, hi = ratio_range
    if not 0 < lo <= hi:
        raise DomainError("ratio range must be positive and increasing")
    if not -1 + 1e-3 <= corr_range[0] <= corr_range[1] <= 1 - 1e-3:
        raise DomainError("correlation range must stay within 1e-3 of (-1, 1)")
    return np.geomspace(lo, hi, n_ratio), np.round(np.linspace(*corr_range, n_corr), 12) + 0.0


def _validate_axes(ratios, corrs):
    ratios = np.asarray(ratios, dtype=float)
    corrs = np.asarray(corrs, dtype=float)
    if ratios.size == 0 or corrs.size == 0:
        raise DomainError("empty grid axis")
    if np.any(ratios <= 0):
        raise DomainError("ratios must be positive")
    if np.any(np.abs(corrs) > 1 - 1e-3):
        raise DomainError("correlations must stay within 1e-3 of (-1, 1)")
    return ratios, corrs


def depth_contour_grid(data, theta, ratios=None, corrs=None, resolution=(21, 21),
                       budget=DEFAULT_BUDGET):
    """Empirical fixed-location shape depth over a (ratio, correlation) grid.

    Parameters
    ----------
    data : array_like, shape (n, 2)
    theta : array_like, shape (2,)
    ratios, corrs : array_like, optional
        Grid axes; default to :func:`grid_axes` with ``resolution``.

    Returns
    -------
    ContourGrid
    """
    X, theta = _check_data(data, theta)
    if X.shape[1] != 2:
        raise UnsupportedDimensionError("contour grids are bivariate")
    if ratios is None or corrs is None:
        dr, dc = grid_axes(resolution)
        ratios = dr if ratios is None else ratios
        corrs = dc if corrs is None else corrs
    ratios, corrs = _validate_axes(ratios, corrs)
    shapes = np.array([shape_from_ratio_corr(r, c) for r in ratios for c in corrs])
    counts = depth_counts_k2(X - theta, shapes).reshape(len(ratios), len(corrs))
    return ContourGrid(ratios, corrs, counts / len(X), counts, len(X))


def population_contour_grid(model, ratios=None, corrs=None, resolution=(21, 21)):
    """Closed-form bivariate elliptical depth over a (ratio, correlation) grid."""
    if ratios is None or corrs is None:
        dr, dc = grid_axes(resolution)
        ratios = dr if ratios is None else ratios
        corrs = dc if corrs is None else corrs
    ratios, corrs = _validate_axes(ratios, corrs)
    depth = np.array([[elliptical_depth_k2(shape_from_ratio_corr(r, c), model)
                       for c in corrs] for r in ratios])
    return ContourGrid(ratios, corrs, depth)


# -- Tyler's M-estimator -----------------------------------------------------

def tyler_residual(data, theta, V):
    """Norm of the mean of ``vec(U U^T - I/k)`` over observations distinct from ``theta``."""
    X, theta = _check_data(data, theta)
    Z = X - theta
    Z = Z[np.any(Z != 0.0, axis=1)]
    k = X.shape[1]
    U = _signs(Z, matrix_invsqrt(V))
    M = U.T @ U / len(U) - np.eye(k) / k
    return float(np.linalg.norm(M))


def tyler_m_estimator(data, theta, tol=1e-9, max_iter=500):
    """Tyler's shape M-estimator by fixed-point iteration.

    Iterates ``V <- k S / tr(S)`` with ``S = mean(z z^T / z^T V^{-1} z)``,
    starting from the normalized covariance of the spatial signs.

    Parameters
    ----------
    data : array_like, shape (n, k)
    theta : array_like, shape (k,)
        Known location; observations equal to it are ignored.
    tol : float
        Target for :func:`tyler_residual`.
    max_iter : int

    Returns
    -------
    ShapeMatrix

    Raises
    ------
    ConvergenceError
        If the residual is still above ``tol`` after ``max_iter`` iterations.
    """
    X, theta = _check_data(data, theta)
    n, k = X.shape
    Z = X - theta
    Z = Z[np.any(Z != 0.0, axis=1)]
    if len(Z) <= k:
        raise DomainError("Tyler's estimator needs more than k observations off theta")

    S0 = Z / np.linalg.norm(Z, axis=1)[:, None]
    try:
        V = np.asarray(normalize_to_shape(S0.T @ S0 / len(S0)))
    except DomainError as exc:
        raise ConvergenceError("signs are concentrated on a hyperplane") from exc

    residual = np.inf
    for it in range(max_iter + 1):
        try:
            isq = matrix_invsqrt(V)
        except DomainError as exc:
            raise ConvergenceError("iterate left the SPD cone", residual, it) from exc
        Y = Z @ isq
        d2 = np.einsum("ij,ij->i", Y, Y)
        U = Y / np.sqrt(d2)[:, None]
        M = U.T @ U / len(U) - np.eye(k) / k
        residual = float(np.linalg.norm(M))
        if residual <= tol:
            return ShapeMatrix(k * V / np.trace(V))
        if it == max_iter:
            break
        S = (Z / d2[:, None]).T @ Z / len(Z)
        V = k * S / np.trace(S)
        V = 0.5 * (V + V.T)
    raise ConvergenceError(
        f"Tyler iteration did not reach tol={tol} in {max_iter} iterations "
        f"(residual {residual:.3e})", residual, max_iter)
