"""Halfspace (Tukey) depth of a point with respect to a finite point cloud.

Depth is computed for closed halfspaces, ``min_u #{i : u'(x_i - theta) >= 0} / n``.
Points coinciding with the query point lie in every closed halfspace.

The planar case is solved exactly by an angular sweep: the closed-halfplane
count, as a function of the direction angle, is piecewise constant between
the ``2n`` critical angles ``alpha_i +- pi/2`` and is never smaller at a
critical angle than on the adjacent arcs, so the minimum is attained at arc
midpoints.  Critical angles closer than :data:`ANGLE_TOL` are merged, which
removes spurious arcs created by rounding when two points are (nearly)
antipodal.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .depthvalue import DepthValue
from .exceptions import DimensionError, DomainError

TWO_PI = 2.0 * np.pi
ANGLE_TOL = 1e-11
_ROW_SPAN = 20.0  # > 3*pi, block width used to batch searchsorted over rows
_FILLER = 19.0


@dataclass(frozen=True)
class DirectionBudget:
    """Finite direction set used by the approximate depth.

    Parameters
    ----------
    n_random : int
        Number of uniform random directions on the sphere.
    use_data_directions : bool
        Add directions derived from the data: normalized points, pairwise
        differences and normals of hyperplanes through ``d - 1`` points (tilted
        so that those points fall outside).  In the plane this adds the exact
        sweep candidates.
    seed : int
        Seed of the direction streams.
    n_data_directions : int
        Cap on each family of data-derived directions.
    """

    n_random: int = 1000
    use_data_directions: bool = True
    seed: int = 0
    n_data_directions: int = 2000

    def __post_init__(self):
        if self.n_random < 0:
            raise DomainError("n_random must be nonnegative")
        if self.n_random == 0 and not self.use_data_directions:
            raise DomainError("direction budget is empty")


DEFAULT_BUDGET = DirectionBudget()


def _as_cloud(points, d=None):
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if P.ndim != 2:
        raise DimensionError("point cloud must be a 2-D array")
    if P.shape[0] == 0:
        raise DomainError("empty point cloud")
    if not np.all(np.isfinite(P)):
        raise DomainError("point cloud has non-finite entries")
    if d is not None and P.shape[1] != d:
        raise DimensionError(f"expected dimension {d}, got {P.shape[1]}")
    return P


def origin_depth_exact_1d(points):
    """Exact depth of the origin for a univariate cloud.

    Returns
    -------
    DepthValue
        ``min(#{x >= 0}, #{x <= 0}) / n``.
    """
    x = _as_cloud(points, 1)[:, 0]
    return DepthValue(int(min(np.sum(x >= 0), np.sum(x <= 0))), len(x))


def min_counts_2d(clouds):
    """Minimal closed-halfplane counts of the origin for a batch of planar clouds.

    Parameters
    ----------
    clouds : ndarray, shape (B, n, 2)

    Returns
    -------
    counts : ndarray of int, shape (B,)
    """
    P = np.asarray(clouds, dtype=float)
    B, n, _ = P.shape
    zero = (P[..., 0] == 0.0) & (P[..., 1] == 0.0)
    n_zero = zero.sum(axis=1)
    m = 2 * (n - n_zero)

    alpha = np.mod(np.arctan2(P[..., 1], P[..., 0]), TWO_PI)
    alpha = np.where(zero, _FILLER, alpha)
    alpha.sort(axis=1)

    crit = np.concatenate(
        [np.mod(alpha + 0.5 * np.pi, TWO_PI), np.mod(alpha + 1.5 * np.pi, TWO_PI)],
        axis=1,
    )
    crit[np.concatenate([zero, zero], axis=1)] = _FILLER
    crit.sort(axis=1)

    idx = np.arange(2 * n)[None, :]
    last = (idx == (m - 1)[:, None])
    nxt = np.where(idx + 1 < m[:, None], idx + 1, 0)
    gap = np.take_along_axis(crit, nxt, axis=1) - crit + np.where(last, TWO_PI, 0.0)
    use = (idx < m[:, None]) & (gap > ANGLE_TOL)

    mid = np.mod(crit + 0.5 * gap, TWO_PI)
    lo = np.mod(mid - 0.5 * np.pi, TWO_PI)

    offset = (_ROW_SPAN * np.arange(B))[:, None]
    flat = (alpha + offset).ravel()

    def below(values, side):
        return np.searchsorted(flat, (values + offset).ravel(), side=side).reshape(B, -1)

    # arc (lo, lo + pi), split at 2*pi
    count = below(np.minimum(lo + np.pi, TWO_PI), "left") - below(lo, "right")
    count += below(np.maximum(lo - np.pi, 0.0), "left") - below(np.zeros_like(lo), "left")
    count = np.where(use, count, n + 1)
    best = count.min(axis=1)
    best = np.where(m == 0, 0, best)
    return (best + n_zero).astype(int)


def origin_depth_exact_2d(points):
    """Exact halfspace depth of the origin for a planar cloud.

    Parameters
    ----------
    points : array_like, shape (n, 2)

    Returns
    -------
    DepthValue
    """
    P = _as_cloud(points, 2)
    return DepthValue(int(min_counts_2d(P[None])[0]), len(P))


def _sweep_directions(P):
    """Unit directions at the arc midpoints of the planar sweep."""
    nz = np.any(P != 0.0, axis=1)
    if not nz.any():
        return np.array([[1.0, 0.0]])
    alpha = np.mod(np.arctan2(P[nz, 1], P[nz, 0]), TWO_PI)
    crit = np.sort(np.concatenate([np.mod(alpha + 0.5 * np.pi, TWO_PI),
                                   np.mod(alpha + 1.5 * np.pi, TWO_PI)]))
    gap = np.diff(np.append(crit, crit[0] + TWO_PI))
    mid = crit[gap > ANGLE_TOL] + 0.5 * gap[gap > ANGLE_TOL]
    return np.column_stack([np.cos(mid), np.sin(mid)])


def _unit_rows(A):
    norms = np.linalg.norm(A, axis=1)
    keep = norms > 0
    return A[keep] / norms[keep, None]


def _hyperplane_directions(P, count, rng):
    """Normals of hyperplanes through the origin and ``d - 1`` data points.

    Each normal is tilted so the defining points fall strictly on the
    negative side; the tilted direction is an honest candidate for the
    infimum.
    """
    nz = P[np.any(P != 0.0, axis=1)]
    n, d = nz.shape
    if d < 2 or n < d - 1:
        return np.empty((0, d))
    out = []
    for _ in range(count):
        J = nz[rng.choice(n, size=d - 1, replace=False)]
        # null space of J
        _, s, vt = np.linalg.svd(J, full_matrices=True)
        if s.size and s[-1] < 1e-12 * s[0]:
            continue
        u = vt[-1]
        tilt, *_ = np.linalg.lstsq(J, -np.ones(d - 1), rcond=None)
        scale = np.max(np.abs(nz @ u)) + 1.0
        for sgn in (1.0, -1.0):
            v = sgn * u + 1e-7 * tilt / (np.linalg.norm(tilt) + 1e-300) * scale
            out.append(v)
    if not out:
        return np.empty((0, d))
    return _unit_rows(np.asarray(out))


def candidate_directions(points, budget=DEFAULT_BUDGET):
    """Finite direction set defined by a budget, in a deterministic order.

    Random directions come from one stream and data directions from
    another, so enlarging ``n_random`` only appends directions.
    """
    P = _as_cloud(points)
    d = P.shape[1]
    ss = np.random.SeedSequence(budget.seed)
    rand_ss, data_ss = ss.spawn(2)
    blocks = []
    if budget.n_random > 0:
        G = np.random.default_rng(rand_ss).standard_normal((budget.n_random, d))
        blocks.append(_unit_rows(G))
    if budget.use_data_directions:
        rng = np.random.default_rng(data_ss)
        cap = budget.n_data_directions
        if d == 1:
            blocks.append(np.array([[1.0], [-1.0]]))
        elif d == 2:
            blocks.append(_sweep_directions(P))
        else:
            nz = P[np.any(P != 0.0, axis=1)]
            if len(nz):
                pts = nz if len(nz) <= cap else nz[rng.choice(len(nz), cap, replace=False)]
                blocks.append(_unit_rows(pts))
                i = rng.integers(0, len(nz), size=cap)
                j = rng.integers(0, len(nz), size=cap)
                blocks.append(_unit_rows(nz[i] - nz[j]))
                blocks.append(_hyperplane_directions(P, cap, rng))
    blocks = [b for b in blocks if len(b)]
    if not blocks:
        return np.empty((0, d))
    return np.concatenate(blocks)


def min_count_over(points, directions, chunk=4096):
    """Minimum over ``u`` and ``-u`` of closed-halfspace counts of the origin."""
    P = _as_cloud(points)
    best = len(P)
    for start in range(0, len(directions), chunk):
        proj = P @ directions[start:start + chunk].T
        pos = np.count_nonzero(proj >= 0.0, axis=0)
        neg = np.count_nonzero(proj <= 0.0, axis=0)
        best = min(best, int(pos.min()), int(neg.min()))
    return best


def origin_depth_approx(points, budget=DEFAULT_BUDGET):
    """Depth of the origin over a finite direction set.

    The result is an upper bound on the exact depth; it is deterministic given
    ``budget.seed``.  With data directions enabled it is exact for ``d <= 2``.

    Parameters
    ----------
    points : array_like, shape (n, d)
    budget : DirectionBudget

    Returns
    -------
    DepthValue
    """
    P = _as_cloud(points)
    D = candidate_directions(P, budget)
    if len(D) == 0:
        return DepthValue(len(P), len(P))
    return DepthValue(min_count_over(P, D), len(P))


def origin_count(points, budget=DEFAULT_BUDGET):
    """Minimal closed-halfspace count of the origin (exact for ``d <= 2``)."""
    P = _as_cloud(points)
    if P.shape[1] == 1:
        return origin_depth_exact_1d(P).count
    if P.shape[1] == 2:
        return int(min_counts_2d(P[None])[0])
    return origin_depth_approx(P, budget).count


def origin_depth(points, budget=DEFAULT_BUDGET):
    """Depth of the origin: exact for ``d <= 2``, approximate otherwise."""
    P = _as_cloud(points)
    return DepthValue(origin_count(P, budget), len(P))


def tukey_depth(theta, points, budget=DEFAULT_BUDGET):
    """Halfspace depth of ``theta`` with respect to ``points``."""
    P = _as_cloud(points)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.shape != (P.shape[1],):
        raise DimensionError("theta and points dimensions disagree")
    return origin_depth(P - theta, budget)


def _depth_counts(thetas, P, budget):
    """Depth counts of several query points (vectorized in the plane)."""
    thetas = np.atleast_2d(thetas)
    if P.shape[1] == 2:
        out = np.empty(len(thetas), dtype=int)
        step = max(1, 2_000_000 // max(len(P), 1))
        for s in range(0, len(thetas), step):
            T = thetas[s:s + step]
            out[s:s + step] = min_counts_2d(P[None, :, :] - T[:, None, :])
        return out
    return np.array([tukey_depth(t, P, budget).count for t in thetas])


def tukey_median(points, budget=DEFAULT_BUDGET, n_restarts=3, max_candidates=4000):
    """Approximate Tukey median (barycenter of the deepest region).

    Candidates are the data points, the coordinatewise median and the iterates
    of Nelder-Mead runs started from the best candidates.  Among all
    evaluated points attaining the largest depth, the coordinatewise mean is
    returned; since depth regions are convex this mean is itself a maximizer
    whenever the depth is exact.

    Parameters
    ----------
    points : array_like, shape (n, d)
    budget : DirectionBudget
        Used for ``d >= 3``.
    n_restarts : int
        Number of Nelder-Mead runs.
    max_candidates : int
        Cap on the number of data points evaluated.

    Returns
    -------
    ndarray, shape (d,)
    """
    P = _as_cloud(points)
    n, d = P.shape
    if n == 1:
        return P[0].copy()
    if d == 1:
        return np.array([np.median(P[:, 0])])

    # distinct points in sorted order: the result ignores row order and duplication
    cand = uniq = np.unique(P, axis=0)
    if len(cand) > max_candidates:
        rng = np.random.default_rng(budget.seed)
        cand = cand[np.sort(rng.choice(len(cand), max_candidates, replace=False))]
    cand = np.vstack([cand, np.median(P, axis=0)])
    counts = _depth_counts(cand, P, budget)

    evaluated = [cand]
    values = [counts]
    order = np.argsort(-counts, kind="stable")
    spread = np.std(uniq, axis=0) + 1e-12
    for start in cand[order[:n_restarts]]:
        trace = []

        def objective(z):
            c = _depth_counts((z * spread)[None], P, budget)[0]
            trace.append((z * spread, c))
            return -c

        simplex = np.vstack([start / spread, start / spread + 0.25 * np.eye(d)])
        minimize(objective, start / spread, method="Nelder-Mead",
                 options={"initial_simplex": simplex, "maxfev": 200 * d,
                          "xatol": 1e-6, "fatol": 0.5})
        if trace:
            evaluated.append(np.array([t[0] for t in trace]))
            values.append(np.array([t[1] for t in trace]))

    pts = np.vstack(evaluated)
    vals = np.concatenate(values)
    best = vals.max()
    winners = pts[vals == best]
    center = winners.mean(axis=0)
    if _depth_counts(center[None], P, budget)[0] >= best:
        return center
    return winners[np.argmin(np.linalg.norm(winners - center, axis=1))]
