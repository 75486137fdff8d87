"""Reproducible samplers for elliptical laws and contaminated mixtures.

All randomness flows through :func:`make_rng`, which derives independent
PCG64 streams from a master seed and an integer key path via
``numpy.random.SeedSequence``.  Replicate ``r`` of a simulation seeded with
``s`` always uses ``make_rng(s, r, ...)``, whatever the execution order.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError
from .spd import ShapeMatrix, matrix_sqrt

GENERATOR = "numpy.PCG64 via SeedSequence(entropy=seed, spawn_key=path)"
GENERATORS = ("normal", "cauchy")
CONTAMINANT_TAGS = ("rotate45", "sphere", "sphere-scaled-4")


def make_rng(seed, *path):
    """Independent generator for ``seed`` and the integer key ``path``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class EllipticalModel:
    """Elliptical law ``theta + R V^{1/2} U`` with an optional atom at ``theta``.

    ``generator`` selects the radial law: ``"normal"`` (chi) or ``"cauchy"``
    (``|Z|/|G|``).  With probability ``atom_mass`` a draw equals ``theta``.
    """

    shape: np.ndarray
    theta: np.ndarray = None
    generator: str = "normal"
    atom_mass: float = 0.0

    def __post_init__(self):
        V = np.asarray(self.shape, dtype=float)
        if isinstance(self.shape, ShapeMatrix):
            V = self.shape.entries
        k = V.shape[0]
        matrix_sqrt(V)
        theta = np.zeros(k) if self.theta is None else np.asarray(self.theta, dtype=float)
        if theta.shape != (k,):
            raise DomainError("theta and shape dimensions disagree")
        if self.generator not in GENERATORS:
            raise DomainError(f"unknown generator {self.generator!r}")
        if not 0.0 <= self.atom_mass < 1.0:
            raise DomainError("atom_mass must lie in [0, 1)")
        object.__setattr__(self, "shape", V)
        object.__setattr__(self, "theta", theta)

    @property
    def k(self):
        return self.shape.shape[0]


@dataclass(frozen=True)
class MixtureSpec:
    """``(1 - eta) P^X + eta P^Y`` with ``Y`` a model or a transform of ``X``.

    ``contaminant`` is an :class:`EllipticalModel` or one of
    ``"rotate45"`` (``X`` rotated by 45 degrees about its center),
    ``"sphere"`` (same law as ``X`` with identity shape) and
    ``"sphere-scaled-4"`` (the latter multiplied by four).  With
    ``symmetric=True`` each outlier is ``Y`` or ``-Y`` with equal probability.
    """

    base: EllipticalModel
    contaminant: object
    eta: float
    symmetric: bool = field(default=False)

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError("eta must lie in [0, 1]")
        if isinstance(self.contaminant, str):
            if self.contaminant not in CONTAMINANT_TAGS:
                raise DomainError(f"unknown contamination pattern {self.contaminant!r}")
            if self.contaminant == "rotate45" and self.base.k != 2:
                raise DomainError("rotate45 is bivariate")
        elif not isinstance(self.contaminant, EllipticalModel):
            raise DomainError("contaminant must be an EllipticalModel or a pattern tag")


def sample_uniform_sphere(k, n, seed):
    """``n`` independent uniform draws on the unit sphere of ``R^k``."""
    if k < 1 or n < 0:
        raise DomainError("need k >= 1 and n >= 0")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    G = rng.standard_normal((n, k))
    norms = np.linalg.norm(G, axis=1)
    while np.any(norms == 0):  # probability zero, kept for totality
        bad = norms == 0
        G[bad] = rng.standard_normal((bad.sum(), k))
        norms = np.linalg.norm(G, axis=1)
    return G / norms[:, None]


def _radial_draws(rng, n, k, generator):
    Z = rng.standard_normal((n, k))
    if generator == "cauchy":
        G = np.abs(rng.standard_normal(n))
        Z = Z / G[:, None]
    return Z


def sample_elliptical(model, n, seed):
    """Draw ``n`` observations from an elliptical model.

    Parameters
    ----------
    model : EllipticalModel
    n : int
    seed : int or numpy.random.Generator

    Returns
    -------
    ndarray, shape (n, k)
    """
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    k = model.k
    Z = _radial_draws(rng, n, k, model.generator)
    X = model.theta + Z @ matrix_sqrt(model.shape)
    if model.atom_mass > 0:
        atom = rng.random(n) < model.atom_mass
        X[atom] = model.theta
    return X


_ROT45 = np.array([[np.cos(np.pi / 4), -np.sin(np.pi / 4)],
                   [np.sin(np.pi / 4), np.cos(np.pi / 4)]])


def _contaminant_draws(spec, m, rng):
    base = spec.base
    tag = spec.contaminant
    if isinstance(tag, EllipticalModel):
        return sample_elliptical(tag, m, rng)
    if tag == "rotate45":
        Y = sample_elliptical(base, m, rng)
        return base.theta + (Y - base.theta) @ _ROT45.T
    sphere = EllipticalModel(np.eye(base.k), base.theta, base.generator, base.atom_mass)
    Y = sample_elliptical(sphere, m, rng)
    if tag == "sphere-scaled-4":
        Y = 4.0 * Y
    return Y


def sample_mixture(spec, n, seed):
    """Draw from a contaminated mixture.

    Returns
    -------
    X : ndarray, shape (n, k)
    labels : ndarray of bool, shape (n,)
        True for rows drawn from the contaminant.
    """
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    labels = rng.random(n) < spec.eta
    m = int(labels.sum())
    X = np.empty((n, spec.base.k))
    X[~labels] = sample_elliptical(spec.base, n - m, rng)
    if m:
        Y = _contaminant_draws(spec, m, rng)
        if spec.symmetric:
            flip = rng.random(m) < 0.5
            Y[flip] = -Y[flip]
        X[labels] = Y
    return X, labels
