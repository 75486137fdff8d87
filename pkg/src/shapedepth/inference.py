"""Randomized depth-based test of ``H0: V = V0`` with Monte Carlo critical values.

The statistic ``T = D_theta(V0, P_n)`` is discrete on the ``1/n`` lattice.  The
test rejects when ``T < t``, accepts when ``T > t`` and, when ``T == t``,
rejects with probability ``gamma``.  Under the null and without an atom at
``theta`` the law of ``T`` does not depend on the generating variate, so
``(t, gamma)`` is estimated once from standard normal samples.

Every replicate ``r`` draws its data from ``make_rng(seed, ..., r)``, so results
do not depend on chunking or on the number of worker processes.
"""

import io
import json
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .depthvalue import DepthValue
from .exceptions import DimensionError, DomainError
from .halfspace import DEFAULT_BUDGET, min_counts_2d
from .samplers import GENERATOR, GENERATORS, EllipticalModel, MixtureSpec, make_rng, sample_elliptical, sample_mixture
from .spd import matrix_invsqrt, matrix_sqrt
from .tyler import _check_data, shape_depth_fixed_theta

DEFAULT_REPLICATES = 100_000
# stream tags below the master seed
_NULL_STREAM = 0
_POWER_STREAM = 1
_ROBUST_STREAM = 2
_RANDOMIZATION_STREAM = 7

SPHERICITY_DIRECTION = np.array([[1.0, 0.5], [0.5, -1.0]])
ROBUSTNESS_NULL = np.diag([2.0, 0.5])
PATTERNS = {"a": "rotate45", "b": "sphere", "c": "sphere-scaled-4"}


@dataclass(frozen=True)
class Calibration:
    """Null critical value ``t_crit = t_count / n`` and randomization ``gamma_rand``."""

    k: int
    n: int
    alpha: float
    t_count: int
    gamma_rand: float
    replicates: int
    seed: int
    generator: str = "normal"
    degenerate: bool = False

    @property
    def t_crit(self):
        return self.t_count / self.n

    def to_dict(self):
        return {"k": self.k, "n": self.n, "alpha": self.alpha, "t_count": self.t_count,
                "t_crit": self.t_crit, "gamma_rand": self.gamma_rand,
                "replicates": self.replicates, "seed": self.seed,
                "generator": self.generator, "degenerate": self.degenerate, "rng": GENERATOR}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, obj):
        try:
            k, n = int(obj["k"]), int(obj["n"])
            t_count = int(round(float(obj["t_crit"]) * n))
            if abs(t_count / n - float(obj["t_crit"])) > 1e-9:
                raise DomainError("t_crit is not on the 1/n lattice")
            return cls(k, n, float(obj["alpha"]), t_count, float(obj["gamma_rand"]),
                       int(obj["replicates"]), int(obj["seed"]),
                       obj.get("generator", "normal"), bool(obj.get("degenerate", False)))
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed calibration: {exc}") from exc

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class TestOutcome:
    """Statistic, decision of the randomized rule, and the uniform draw if one was used."""

    statistic: DepthValue
    decision: str
    rand_draw: float = None

    __test__ = False

    @property
    def rejected(self):
        return self.decision in ("reject", "randomized-reject")


def _identity_counts_k2(Z):
    """Depth counts of ``I_2`` at the origin for a batch of samples ``(B, n, 2)``."""
    r2 = np.einsum("bnk,bnk->bn", Z, Z)
    zero = r2 == 0.0
    r2 = np.where(zero, 1.0, r2)
    W = np.stack([Z[..., 0] * Z[..., 1] / r2, Z[..., 1] ** 2 / r2 - 0.5], axis=-1)
    if zero.any():
        # observations at the center never count: slow path drops them
        return np.array([
            shape_depth_fixed_theta(z, np.zeros(2), np.eye(2)).count for z in Z
        ])
    return min_counts_2d(W)


def _statistic_counts(samples, k, budget):
    if k == 2:
        return _identity_counts_k2(samples)
    return np.array([shape_depth_fixed_theta(z, np.zeros(k), np.eye(k), budget).count
                     for z in samples])


def _null_counts(k, n, generator, seed, start, stop, budget=DEFAULT_BUDGET, chunk=500):
    model = EllipticalModel(np.eye(k), generator=generator)
    # generator-specific streams: same-stream Cauchy signs would equal the normal ones
    tag = GENERATORS.index(generator)
    out = np.empty(stop - start, dtype=int)
    for s in range(start, stop, chunk):
        e = min(stop, s + chunk)
        Z = np.stack([sample_elliptical(model, n, make_rng(seed, _NULL_STREAM, tag, r))
                      for r in range(s, e)])
        out[s - start:e - start] = _statistic_counts(Z, k, budget)
    return out


def null_statistic_counts(k, n, replicates, seed, generator="normal", budget=DEFAULT_BUDGET,
                          threads=1):
    """Simulated null depth counts ``n T`` for ``replicates`` samples."""
    if threads <= 1 or replicates < 2000:
        return _null_counts(k, n, generator, seed, 0, replicates, budget)
    bounds = np.linspace(0, replicates, threads + 1).astype(int)
    with ProcessPoolExecutor(max_workers=threads) as ex:
        parts = ex.map(_null_counts, [k] * threads, [n] * threads, [generator] * threads,
                       [seed] * threads, bounds[:-1], bounds[1:], [budget] * threads)
        return np.concatenate(list(parts))


def critical_values_from_counts(counts, n, alpha):
    """``(t_count, gamma, degenerate)`` from simulated null counts."""
    counts = np.asarray(counts)
    R = counts.size
    values, freq = np.unique(counts, return_counts=True)
    cum = np.cumsum(freq)
    # smallest t with P(T <= t) >= alpha
    i = int(np.searchsorted(cum, alpha * R - 1e-9 * R))
    i = min(i, len(values) - 1)
    t = int(values[i])
    p_less = (cum[i] - freq[i]) / R
    p_eq = freq[i] / R
    if p_eq == 0:
        return t, 0.0, True
    gamma = (alpha - p_less) / p_eq
    return t, float(min(1.0, max(0.0, gamma))), False


def calibrate_critical_values(k, n, alpha=0.05, replicates=DEFAULT_REPLICATES, seed=0,
                              budget=DEFAULT_BUDGET, generator="normal", threads=1):
    """Monte Carlo estimate of the null critical value and randomization level.

    Parameters
    ----------
    k, n : int
        Dimension and sample size.
    alpha : float
        Level in ``(0, 1]``.
    replicates : int
        Number of simulated null samples (at least 1000).
    seed : int
    generator : {"normal", "cauchy"}
        Null law; the result does not depend on it up to Monte Carlo error.
    threads : int
        Worker processes; does not change the result.

    Returns
    -------
    Calibration
    """
    if replicates < 1000:
        raise DomainError("calibration needs at least 1000 replicates")
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    counts = null_statistic_counts(k, n, replicates, seed, generator, budget, threads)
    t, gamma, degenerate = critical_values_from_counts(counts, n, alpha)
    if degenerate:
        warnings.warn("critical value has zero simulated mass; gamma_rand set to 0")
    return Calibration(k, n, alpha, t, gamma, replicates, seed, generator, degenerate)


def _decide(count, calib, u):
    if count < calib.t_count:
        return "reject", None
    if count > calib.t_count:
        return "accept", None
    return ("randomized-reject" if u < calib.gamma_rand else "randomized-accept"), u


def standardize(data, theta, V0):
    """``(x - theta) V0^{-1/2}``, mapping ``H0: V = V0`` to sphericity about the origin."""
    X, theta = _check_data(data, theta)
    return (X - theta) @ matrix_invsqrt(V0)


def shape_test(data, theta, V0, calib, seed=0, budget=DEFAULT_BUDGET):
    """Randomized depth test of ``H0: V = V0`` at a known location.

    The statistic is computed on the data standardized by ``V0^{-1/2}``
    against the identity shape, which by affine invariance equals
    ``D_theta(V0, P_n)``.

    Returns
    -------
    TestOutcome
    """
    X, theta = _check_data(data, theta)
    n, k = X.shape
    if (calib.k, calib.n) != (k, n):
        raise DimensionError(f"calibration is for (k={calib.k}, n={calib.n}), data is ({k}, {n})")
    Y = standardize(X, theta, V0)
    T = shape_depth_fixed_theta(Y, np.zeros(k), np.eye(k), budget)
    u = None
    if T.count == calib.t_count:
        u = float(make_rng(seed, _RANDOMIZATION_STREAM).random())
    decision, u = _decide(T.count, calib, u)
    return TestOutcome(T, decision, u)


# -- simulation harnesses ----------------------------------------------------

@dataclass
class SimulationTable:
    """Rejection frequencies indexed by a scalar parameter."""

    name: str
    params: list
    rejections: list
    replications: int

    @property
    def frequencies(self):
        return np.array(self.rejections) / self.replications

    def to_csv(self):
        buf = io.StringIO()
        buf.write("param,frequency,replications\n")
        for p, f in zip(self.params, self.frequencies):
            buf.write(f"{float(p)!r},{float(f)!r},{self.replications}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, name=""):
        rows = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
        reps = int(rows[0, 2])
        return cls(name, rows[:, 0].tolist(),
                   [int(round(f * reps)) for f in rows[:, 1]], reps)


def _rejections(samples, calib, seeds_path, budget):
    """Number of rejections over a batch of samples already standardized."""
    k = samples.shape[2]
    counts = _statistic_counts(samples, k, budget)
    rejected = 0
    for c, path in zip(counts, seeds_path):
        u = None
        if c == calib.t_count:
            u = make_rng(*path, _RANDOMIZATION_STREAM).random()
        decision, _ = _decide(int(c), calib, u)
        rejected += decision in ("reject", "randomized-reject")
    return rejected


def sphericity_alternative(ell, xi):
    """``I_2 + ell * xi * [[1, 0.5], [0.5, -1]]``."""
    V = np.eye(2) + ell * xi * SPHERICITY_DIRECTION
    return V


def power_simulation(calib, ells=range(7), xi=0.035, generator="normal", replications=3000,
                     seed=0, budget=DEFAULT_BUDGET, chunk=500):
    """Rejection frequencies of the sphericity test under ``V = I + ell xi D``.

    Parameters
    ----------
    calib : Calibration
        Critical values for ``k = 2`` and the simulated sample size ``calib.n``.
    ells : sequence of int
    xi : float
        0.035 for normal and 0.045 for Cauchy samples give comparable power.

    Returns
    -------
    SimulationTable
    """
    ells = list(ells)
    bad = []
    for ell in ells:
        try:
            matrix_sqrt(sphericity_alternative(ell, xi))
        except DomainError:
            bad.append(ell)
    if bad:
        raise DomainError(f"alternatives are not positive definite for ell in {bad}")
    if calib.k != 2:
        raise DimensionError("power simulation is bivariate")
    n = calib.n
    rejections = []
    for li, ell in enumerate(ells):
        model = EllipticalModel(sphericity_alternative(ell, xi), generator=generator)
        rej = 0
        for s in range(0, replications, chunk):
            rs = range(s, min(replications, s + chunk))
            paths = [(seed, _POWER_STREAM, li, r) for r in rs]
            Z = np.stack([sample_elliptical(model, n, make_rng(*p)) for p in paths])
            rej += _rejections(Z, calib, paths, budget)
        rejections.append(rej)
    return SimulationTable(f"power-{generator}", ells, rejections, replications)


def robustness_simulation(calib, etas=(0.0, 0.025, 0.05, 0.1, 0.2, 0.25, 0.3), pattern="a",
                          generator="normal", replications=3000, seed=0,
                          budget=DEFAULT_BUDGET, chunk=500):
    """Null rejection frequencies of ``H0: V = diag(2, 1/2)`` under contamination.

    Samples come from ``(1 - eta) P^X + eta P^Y`` with ``X`` null and ``Y`` given
    by ``pattern``: ``"a"`` rotates ``X`` by 45 degrees, ``"b"`` has identity
    shape, ``"c"`` is ``"b"`` multiplied by four.  The random streams do not
    depend on the pattern, so all patterns share the same samples at
    ``eta = 0``.

    Returns
    -------
    SimulationTable
    """
    if pattern not in PATTERNS:
        raise DomainError(f"unknown pattern {pattern!r}; expected one of a, b, c")
    if calib.k != 2:
        raise DimensionError("robustness simulation is bivariate")
    etas = [float(e) for e in etas]
    n = calib.n
    base = EllipticalModel(ROBUSTNESS_NULL, generator=generator)
    isq = matrix_invsqrt(ROBUSTNESS_NULL)
    rejections = []
    for ei, eta in enumerate(etas):
        spec = MixtureSpec(base, PATTERNS[pattern], eta)
        rej = 0
        for s in range(0, replications, chunk):
            rs = range(s, min(replications, s + chunk))
            paths = [(seed, _ROBUST_STREAM, ei, r) for r in rs]
            Z = np.stack([sample_mixture(spec, n, make_rng(*p))[0] @ isq for p in paths])
            rej += _rejections(Z, calib, paths, budget)
        rejections.append(rej)
    return SimulationTable(f"robustness-{pattern}-{generator}", etas, rejections, replications)
