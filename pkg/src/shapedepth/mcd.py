"""Minimum covariance determinant shapes and depth-based choice of the trimming level.

``mcd_subset`` is a FAST-MCD style search: random ``(k+1)``-point seeds are
grown to ``h`` points and refined by concentration steps, each of which can
only decrease the covariance determinant.  Covariances are maximum-likelihood
(divisor ``h``); the divisor does not affect the shape.
"""

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .depthvalue import DepthValue
from .exceptions import DegeneracyError, DomainError
from .halfspace import DEFAULT_BUDGET, tukey_median
from .samplers import EllipticalModel, MixtureSpec, make_rng, sample_mixture
from .spd import ShapeMatrix, normalize_to_shape
from .tyler import _check_data, shape_depth, shape_depth_fixed_theta

_SINGULAR_RCOND = 1e-12


def subset_size(gamma, n):
    """``h = ceil(gamma * n)``, robust to rounding in ``gamma * n``."""
    if not 0.5 <= gamma <= 1.0:
        raise DomainError(f"gamma={gamma} outside [0.5, 1]")
    return min(n, math.ceil(gamma * n - 1e-9))


@dataclass
class McdResult:
    """Raw MCD solution for one trimming level."""

    gamma: float
    subset: np.ndarray
    location: np.ndarray
    scatter: np.ndarray
    shape: ShapeMatrix
    determinant: float
    csteps: int = 0
    determinant_path: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "gamma": self.gamma,
            "subset": [int(i) for i in self.subset],
            "location": self.location.tolist(),
            "scatter": self.scatter.tolist(),
            "shape": self.shape.to_dict(),
            "determinant": self.determinant,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def _cov(Xs):
    mu = Xs.mean(axis=0)
    C = Xs - mu
    return mu, C.T @ C / len(Xs)


def _det_or_none(S):
    w = np.linalg.eigvalsh(S)
    if w[0] <= _SINGULAR_RCOND * max(w[-1], 0.0):
        return None
    return float(np.prod(w))


def _closest(X, mu, S, h):
    L = np.linalg.cholesky(S)
    D = np.linalg.solve(L, (X - mu).T)
    d2 = np.einsum("ij,ij->j", D, D)
    # stable order so ties are resolved by index
    return np.sort(np.argsort(d2, kind="stable")[:h])


def _cstep_chain(X, subset, h, max_steps):
    """Concentration steps until the subset is stable.

    Returns ``(subset, mu, S, det, path)`` or ``None`` if a singular
    covariance is met.
    """
    mu, S = _cov(X[subset])
    det = _det_or_none(S)
    if det is None:
        return None
    path = [det]
    for _ in range(max_steps):
        new = _closest(X, mu, S, h)
        if np.array_equal(new, subset):
            break
        mu_new, S_new = _cov(X[new])
        det_new = _det_or_none(S_new)
        if det_new is None:
            return None
        if det_new > det * (1 + 1e-12):
            break
        subset, mu, S, det = new, mu_new, S_new, det_new
        path.append(det)
    return subset, mu, S, det, path


def _initial_subset(X, h, rng):
    n, k = X.shape
    idx = rng.permutation(n)
    m = k + 1
    while m <= n:
        seed = idx[:m]
        mu, S = _cov(X[seed])
        if _det_or_none(S) is not None:
            return _closest(X, mu, S, h)
        if m >= h:
            return None
        m += 1
    return None


def mcd_subset(data, gamma, n_starts=100, seed=0, keep_best=10, max_steps=200):
    """Raw MCD subset, scatter and shape for one trimming level.

    Parameters
    ----------
    data : array_like, shape (n, k)
    gamma : float
        Proportion of observations kept, in ``[0.5, 1]``.
    n_starts : int
        Number of random starts; each receives two C-steps, the best
        ``keep_best`` are iterated to convergence.
    seed : int

    Returns
    -------
    McdResult

    Raises
    ------
    DegeneracyError
        If every chain hits a singular subset covariance.
    """
    X, _ = _check_data(data)
    n, k = X.shape
    h = subset_size(gamma, n)
    if h <= k:
        raise DomainError(f"subset size {h} must exceed the dimension {k}")
    if h == n:
        mu, S = _cov(X)
        det = _det_or_none(S)
        if det is None:
            raise DegeneracyError("sample covariance is singular")
        return McdResult(gamma, np.arange(n), mu, S, normalize_to_shape(S), det, 0, [det])

    rng = make_rng(seed, 0)
    short = []
    for _ in range(n_starts):
        start = _initial_subset(X, h, rng)
        if start is None:
            continue
        res = _cstep_chain(X, start, h, 2)
        if res is not None:
            short.append(res)
    if not short:
        raise DegeneracyError("all MCD chains produced singular covariances")
    short.sort(key=lambda r: (r[3], tuple(r[0])))

    best = None
    for sub, _, _, det0, path0 in short[:keep_best]:
        res = _cstep_chain(X, sub, h, max_steps)
        if res is None:
            continue
        sub, mu, S, det, path = res
        cand = (det, tuple(sub), mu, S, path0 + path[1:])
        if best is None or cand[:2] < best[:2]:
            best = cand
    if best is None:
        raise DegeneracyError("all refined MCD chains produced singular covariances")
    det, sub, mu, S, path = best
    return McdResult(gamma, np.array(sub), mu, S, normalize_to_shape(S), det,
                     len(path) - 1, path)


@dataclass
class GammaCurve:
    """Depth of ``V_gamma`` against its own optimal subsample, for each ``gamma``."""

    gammas: np.ndarray
    depths: list
    subset_sizes: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.gammas) <= 0):
            raise DomainError("gammas must be strictly increasing")

    def values(self):
        return np.array([float(d) for d in self.depths])

    def to_csv(self):
        buf = io.StringIO()
        buf.write("gamma,depth,subset_size\n")
        for g, d, h in zip(self.gammas, self.depths, self.subset_sizes):
            buf.write(f"{float(g)!r},{float(d)!r},{int(h)}\n")
        return buf.getvalue()


def _check_gammas(gammas):
    g = np.round(np.asarray(gammas, dtype=float).ravel(), 12)
    if g.size == 0:
        raise DomainError("empty gamma grid")
    if np.any(g < 0.5) or np.any(g > 1.0):
        raise DomainError("gammas must lie in [0.5, 1]")
    return g


def gamma_depth_curve(data, gammas, n_starts=100, seed=0, budget=DEFAULT_BUDGET):
    """Depth curve ``gamma -> D(V_gamma, P_gamma)``.

    ``P_gamma`` is the empirical measure of the optimal MCD subsample, with
    its own Tukey median as location.

    Returns
    -------
    GammaCurve
    """
    X, _ = _check_data(data)
    g = np.sort(_check_gammas(gammas))
    depths, sizes = [], []
    for gamma in g:
        res = mcd_subset(X, gamma, n_starts=n_starts, seed=seed)
        sub = X[res.subset]
        depths.append(shape_depth(sub, res.shape, budget))
        sizes.append(len(res.subset))
    return GammaCurve(g, depths, np.array(sizes))


@dataclass
class GammaSelection:
    gamma: float
    depth: DepthValue
    mcd: McdResult
    depths: dict


def select_gamma_max_depth(data, gammas, reference=None, n_starts=100, seed=0,
                           budget=DEFAULT_BUDGET):
    """Trimming level whose MCD shape is deepest with respect to a reference sample.

    Ties are broken toward the larger ``gamma``.

    Parameters
    ----------
    data : array_like, shape (n, k)
        Sample on which the MCD shapes are computed.
    gammas : sequence of float
    reference : array_like, optional
        Sample defining the depth; defaults to ``data``.

    Returns
    -------
    GammaSelection
    """
    X, _ = _check_data(data)
    R = X if reference is None else _check_data(reference)[0]
    theta = tukey_median(R, budget)
    best = None
    depths = {}
    for gamma in np.sort(_check_gammas(gammas)):
        res = mcd_subset(X, gamma, n_starts=n_starts, seed=seed)
        d = shape_depth_fixed_theta(R, theta, res.shape, budget)
        depths[float(gamma)] = d
        if best is None or d >= best[1]:
            best = (float(gamma), d, res)
    return GammaSelection(best[0], best[1], best[2], depths)


def principal_angle(V):
    """Angle ``arccos |e_1^T v|`` between the first eigenvector of ``V`` and ``e_1``."""
    w, Q = np.linalg.eigh(np.asarray(V, dtype=float))
    v = Q[:, -1]
    return float(np.arccos(min(1.0, abs(v[0]) / np.linalg.norm(v))))


def contamination_spec(delta, eta):
    """Bivariate mixture with clean ``N(0, diag(4, 1))`` and outliers ``+-N((0, delta), I)``."""
    base = EllipticalModel(np.diag([4.0, 1.0]))
    outlier = EllipticalModel(np.eye(2), theta=np.array([0.0, float(delta)]))
    return MixtureSpec(base, outlier, eta, symmetric=True)


@dataclass
class MseCurve:
    """Mean squared first-eigenvector angle error for each ``gamma``."""

    gammas: np.ndarray
    mse: np.ndarray
    replications: int

    def argmin(self):
        return float(self.gammas[int(np.argmin(self.mse))])

    def to_csv(self):
        buf = io.StringIO()
        buf.write("gamma,mse,replications\n")
        for g, m in zip(self.gammas, self.mse):
            buf.write(f"{float(g)!r},{float(m)!r},{self.replications}\n")
        return buf.getvalue()


def principal_direction_mse(delta=5.0, eta=0.2, n=400, replications=100, gammas=None,
                            n_starts=100, seed=0):
    """Monte Carlo ``MSE_gamma = mean_r arccos(|e_1^T v_{r,gamma}|)^2`` for the MCD shapes.

    Parameters
    ----------
    delta, eta : float
        Outlier offset and contamination proportion of :func:`contamination_spec`.
    n, replications : int
    gammas : array_like, optional
        Defaults to ``0.5, 0.51, ..., 1``.
    n_starts, seed : int
        Replication ``r`` draws its sample from ``make_rng(seed, 3, r)`` and
        runs the MCD search with seed ``r``.

    Returns
    -------
    MseCurve
    """
    g = np.sort(_check_gammas(np.linspace(0.5, 1.0, 51) if gammas is None else gammas))
    spec = contamination_spec(delta, eta)
    sq = np.zeros(len(g))
    for r in range(replications):
        X, _ = sample_mixture(spec, n, make_rng(seed, 3, r))
        for i, gamma in enumerate(g):
            res = mcd_subset(X, gamma, n_starts=n_starts, seed=r)
            sq[i] += principal_angle(res.scatter) ** 2
    return MseCurve(g, sq / replications, replications)
