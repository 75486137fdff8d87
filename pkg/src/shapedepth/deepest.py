"""Deepest shape matrices by derivative-free search over the trace-k SPD manifold.

Shapes are parametrized by the chart ``s -> k expm(S(s)) / tr expm(S(s))``
where ``S(s)`` is the symmetric trace-zero matrix with ``vech0(S) = s``.
Empirical depth is a step function of ``s`` taking values ``l/n``, so the
search is a multistart pattern search followed by Nelder-Mead, both
derivative-free.  All evaluated points at the final depth level form a
plateau sample, which is enriched by random probing and averaged.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .depthvalue import DepthValue
from .exceptions import ConvergenceError, DomainError
from .halfspace import DEFAULT_BUDGET, DirectionBudget, tukey_median
from .samplers import make_rng
from .spd import (
    ShapeMatrix,
    expansion_matrix,
    matrix_exp,
    matrix_log,
    normalize_to_shape,
    reduced_dim,
    vech0,
)
from .tyler import _check_data, depth_counts_k2, shape_depth_fixed_theta, tyler_m_estimator


def chart_to_shape(s, k):
    """Shape matrix at chart coordinates ``s`` (trace exactly ``k`` up to rounding)."""
    s = np.asarray(s, dtype=float)
    S = (expansion_matrix(k) @ s).reshape(k, k, order="F")
    E = matrix_exp(S)
    return k * E / np.trace(E)


def shape_to_chart(V):
    """Chart coordinates of an SPD matrix (scale is discarded)."""
    V = np.asarray(V, dtype=float)
    k = V.shape[0]
    L = matrix_log(V)
    L -= np.trace(L) / k * np.eye(k)
    return vech0(L)


@dataclass(frozen=True)
class DeepestShapeOptions:
    """Tuning of the deepest-shape search.

    Defaults: 8 starts, pattern-search step 0.5 halved down to 1e-3, random
    starts perturbing the Tyler estimate with scale 0.3, plateau capped at
    256 members.
    """

    n_starts: int = 8
    initial_step: float = 0.5
    shrink: float = 0.5
    min_step: float = 1e-3
    perturb_scale: float = 0.3
    plateau_cap: int = 256
    plateau_rounds: int = 6
    plateau_batch: int = 64
    nelder_mead_maxfev: int = 400
    seed: int = 0
    budget: DirectionBudget = field(default=DEFAULT_BUDGET)


@dataclass
class DeepestShapeResult:
    """Barycenter of the sampled deepest-shape plateau and its depth."""

    shape: ShapeMatrix
    depth: DepthValue
    evaluations: int
    plateau_size: int
    theta: np.ndarray = None
    plateau: np.ndarray = field(default=None, repr=False)  # chart coordinates

    def to_dict(self):
        return {
            "shape": self.shape.to_dict(),
            "depth": str(self.depth),
            "evaluations": int(self.evaluations),
            "plateau_size": int(self.plateau_size),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, obj):
        return cls(ShapeMatrix.from_dict(obj["shape"]), DepthValue.parse(obj["depth"]),
                   int(obj["evaluations"]), int(obj["plateau_size"]))


class _Objective:
    """Depth counts of chart points, with a log of every evaluation."""

    def __init__(self, X, theta, budget):
        self.Z = X - theta
        self.X = X
        self.theta = theta
        self.k = X.shape[1]
        self.budget = budget
        self.points = []
        self.counts = []

    def __call__(self, S):
        S = np.atleast_2d(np.asarray(S, dtype=float))
        Vs = np.array([chart_to_shape(s, self.k) for s in S])
        if self.k == 2:
            c = depth_counts_k2(self.Z, Vs)
        else:
            c = np.array([shape_depth_fixed_theta(self.X, self.theta, V, self.budget).count
                          for V in Vs])
        self.points.extend(S)
        self.counts.extend(c.tolist())
        return c

    @property
    def evaluations(self):
        return len(self.counts)


def _pattern_search(obj, s0, c0, opts):
    d = len(s0)
    s, best = np.array(s0, dtype=float), c0
    step = opts.initial_step
    moves = np.vstack([np.eye(d), -np.eye(d)])
    while step >= opts.min_step:
        cand = s + step * moves
        c = obj(cand)
        j = int(np.argmax(c))
        if c[j] > best:
            s, best = cand[j], int(c[j])
        else:
            step *= opts.shrink
    return s, best


def _starts(X, theta, opts, rng):
    k = X.shape[1]
    starts = [np.zeros(reduced_dim(k))]
    tyler = None
    try:
        tyler = shape_to_chart(tyler_m_estimator(X, theta, tol=1e-6, max_iter=200))
        starts.append(tyler)
    except (ConvergenceError, DomainError):
        pass
    Z = X - theta
    try:
        starts.append(shape_to_chart(normalize_to_shape(Z.T @ Z / len(Z))))
    except DomainError:
        pass
    center = tyler if tyler is not None else starts[-1]
    while len(starts) < opts.n_starts:
        starts.append(center + opts.perturb_scale * rng.standard_normal(reduced_dim(k)))
    return np.array(starts[:max(opts.n_starts, 1)])


def deepest_shape_fixed_theta(data, theta, opts=None):
    """Deepest Tyler shape at a specified location.

    Parameters
    ----------
    data : array_like, shape (n, k)
    theta : array_like, shape (k,)
    opts : DeepestShapeOptions, optional

    Returns
    -------
    DeepestShapeResult
        ``depth`` is the re-evaluated depth of the returned shape.  For
        ``k = 2`` it equals the largest depth found, since the plateau is
        convex in matrix space and its barycenter stays inside it.
    """
    opts = opts or DeepestShapeOptions()
    X, theta = _check_data(data, theta)
    k = X.shape[1]
    if k < 2:
        raise DomainError("shape depth needs k >= 2")
    rng = make_rng(opts.seed, 1)
    obj = _Objective(X, theta, opts.budget)

    starts = _starts(X, theta, opts, rng)
    start_counts = obj(starts)
    for s0, c0 in zip(starts, start_counts):
        s, c = _pattern_search(obj, s0, int(c0), opts)
        minimize(lambda z: -float(obj(z)[0]), s, method="Nelder-Mead",
                 options={"maxfev": opts.nelder_mead_maxfev, "xatol": opts.min_step,
                          "fatol": 0.5,
                          "initial_simplex": np.vstack([s, s + opts.initial_step * 0.25
                                                        * np.eye(len(s))])})

    plateau, level = _explore_plateau(obj, opts, rng)
    members = plateau[np.lexsort(plateau.T[::-1])]
    Vs = np.array([chart_to_shape(s, k) for s in members])
    V_bar = Vs.mean(axis=0)
    V_bar = k * V_bar / np.trace(V_bar)
    c_bar = int(obj(shape_to_chart(V_bar))[0])
    if c_bar < level:
        # possible only with approximate depth (k >= 3)
        centre = members.mean(axis=0)
        s_best = members[np.argmin(np.linalg.norm(members - centre, axis=1))]
        V_bar = chart_to_shape(s_best, k)
        c_bar = int(obj(s_best)[0])
    shape = normalize_to_shape(V_bar)
    return DeepestShapeResult(shape, DepthValue(c_bar, len(X)), obj.evaluations,
                              len(members), theta, members)


def _explore_plateau(obj, opts, rng):
    """Probe around the best points; return the plateau sample and its level."""
    scales = opts.initial_step * np.array([0.4, 0.2, 0.1, 0.05, 0.02, 0.01])
    for _ in range(opts.plateau_rounds):
        pts = np.asarray(obj.points)
        cnt = np.asarray(obj.counts)
        level = cnt.max()
        members = pts[cnt == level]
        base = members[rng.integers(0, len(members), size=opts.plateau_batch)]
        scale = scales[rng.integers(0, len(scales), size=opts.plateau_batch)]
        probe = base + scale[:, None] * rng.standard_normal(base.shape)
        obj(probe)
    pts = np.asarray(obj.points)
    cnt = np.asarray(obj.counts)
    level = int(cnt.max())
    members = pts[cnt == level]
    members = np.unique(members, axis=0)
    if len(members) > opts.plateau_cap:
        # reservoir-equivalent uniform subsample with the run seed
        keep = np.sort(make_rng(opts.seed, 2).choice(len(members), opts.plateau_cap,
                                                      replace=False))
        members = members[keep]
    return members, level


def deepest_shape(data, opts=None):
    """Deepest Tyler shape with the location replaced by the Tukey median."""
    opts = opts or DeepestShapeOptions()
    X, _ = _check_data(data)
    theta = tukey_median(X, opts.budget)
    return deepest_shape_fixed_theta(X, theta, opts)
