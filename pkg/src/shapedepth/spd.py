"""Shape matrices, SPD matrix functions and multivariate signs.

A shape matrix is a symmetric positive definite ``k x k`` matrix with trace
``k``.  All matrix functions go through a symmetric eigendecomposition; no
clamping of small eigenvalues is performed since depth is only defined on
strictly positive definite matrices.
"""

import functools
import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionError, DomainError

SYMMETRY_RTOL = 1e-10
TRACE_ATOL = 1e-8
EIGEN_FLOOR = 1e-12


def _as_square(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix has non-finite entries")
    return A


def _spd_eigh(A):
    """Eigendecomposition of an SPD matrix, raising on non-SPD input."""
    A = _as_square(A)
    scale = max(np.max(np.abs(A)), np.finfo(float).tiny)
    if np.max(np.abs(A - A.T)) > SYMMETRY_RTOL * scale:
        raise DomainError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    w, Q = np.linalg.eigh(A)
    k = A.shape[0]
    floor = EIGEN_FLOOR * max(np.trace(A), 0.0) / k
    if w[0] <= floor:
        raise DomainError(
            f"matrix is not positive definite (smallest eigenvalue {w[0]:.3e})"
        )
    return w, Q


def _spd_function(A, fun):
    w, Q = _spd_eigh(A)
    out = (Q * fun(w)) @ Q.T
    return 0.5 * (out + out.T)


def matrix_sqrt(V):
    """Unique SPD square root of an SPD matrix.

    Parameters
    ----------
    V : array_like, shape (k, k)
        Symmetric positive definite matrix.

    Returns
    -------
    S : ndarray, shape (k, k)
        SPD matrix with ``S @ S == V`` up to rounding.
    """
    return _spd_function(V, np.sqrt)


def matrix_invsqrt(V):
    """Inverse of the SPD square root, ``V^{-1/2}``."""
    return _spd_function(V, lambda w: 1.0 / np.sqrt(w))


def matrix_log(V):
    """Principal logarithm of an SPD matrix."""
    return _spd_function(V, np.log)


def matrix_exp(S):
    """Exponential of a symmetric matrix (always SPD)."""
    S = _as_square(S)
    S = 0.5 * (S + S.T)
    w, Q = np.linalg.eigh(S)
    out = (Q * np.exp(w)) @ Q.T
    return 0.5 * (out + out.T)


def geodesic_distance(Va, Vb):
    r"""Affine-invariant Riemannian distance between SPD matrices.

    .. math::
        d(V_a, V_b) = \Vert \log(V_a^{-1/2} V_b V_a^{-1/2}) \Vert_F

    computed from the generalized eigenvalues of the pencil ``(Vb, Va)``.
    """
    Va = np.asarray(Va, dtype=float)
    Vb = np.asarray(Vb, dtype=float)
    if Va.shape != Vb.shape:
        raise DimensionError("matrices must have equal dimensions")
    isq = matrix_invsqrt(Va)
    _spd_eigh(Vb)
    C = isq @ Vb @ isq
    w = np.linalg.eigvalsh(0.5 * (C + C.T))
    return float(np.sqrt(np.sum(np.log(w) ** 2)))


@dataclass(frozen=True, eq=False)
class ShapeMatrix:
    """SPD ``k x k`` matrix normalized to trace ``k``.

    Construction validates symmetry, positive definiteness and the trace
    constraint.  Use :meth:`unchecked` in inner loops where the matrix is
    known to be valid by construction.
    """

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        A = _as_square(self.entries).copy()
        k = A.shape[0]
        if k < 2:
            raise DimensionError("shape matrices need k >= 2")
        _spd_eigh(A)
        if abs(np.trace(A) - k) > TRACE_ATOL:
            raise DomainError(f"trace is {np.trace(A):.12g}, expected {k}")
        A = 0.5 * (A + A.T)
        A.setflags(write=False)
        object.__setattr__(self, "entries", A)

    @classmethod
    def unchecked(cls, entries):
        obj = object.__new__(cls)
        A = np.array(entries, dtype=float)
        A.setflags(write=False)
        object.__setattr__(obj, "entries", A)
        return obj

    @classmethod
    def identity(cls, k):
        return cls.unchecked(np.eye(k))

    @property
    def k(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)

    def __repr__(self):
        return f"ShapeMatrix({np.array2string(self.entries, precision=6)})"

    def __eq__(self, other):
        if not isinstance(other, ShapeMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    __hash__ = None

    def to_dict(self):
        return {"k": self.k, "entries": self.entries.tolist()}

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj):
        try:
            k = int(obj["k"])
            A = np.array(obj["entries"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed shape matrix JSON: {exc}") from exc
        if A.shape != (k, k):
            raise DimensionError(f"entries shape {A.shape} does not match k={k}")
        if obj.get("normalize", False):
            return normalize_to_shape(A)
        return cls(A)

    @classmethod
    def from_json(cls, text):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(obj)


def normalize_to_shape(A):
    """Rescale an SPD matrix to trace ``k``.

    Parameters
    ----------
    A : array_like, shape (k, k)
        Any SPD matrix, e.g. a covariance or scatter estimate.

    Returns
    -------
    ShapeMatrix
        ``k A / tr(A)``, symmetrized.
    """
    A = _as_square(A)
    _spd_eigh(A)
    k = A.shape[0]
    V = k * A / np.trace(A)
    V = 0.5 * (V + V.T)
    # one more division absorbs rounding in the first trace
    V = k * V / np.trace(V)
    return ShapeMatrix(V)


def transform_shape(A, V):
    """Shape matrix proportional to ``A V A^T`` (affine image of a shape)."""
    A = np.asarray(A, dtype=float)
    return normalize_to_shape(A @ np.asarray(V, dtype=float) @ A.T)


def sign_vector(x, theta, V):
    """Multivariate sign ``V^{-1/2}(x - theta) / ||V^{-1/2}(x - theta)||``.

    Rows of ``x`` equal to ``theta`` map to the zero vector.

    Parameters
    ----------
    x : array_like, shape (k,) or (n, k)
    theta : array_like, shape (k,)
    V : array_like, shape (k, k)

    Returns
    -------
    U : ndarray, same shape as ``x``
    """
    x = np.asarray(x, dtype=float)
    theta = np.asarray(theta, dtype=float)
    V = np.asarray(V, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    k = V.shape[0]
    if X.shape[1] != k or theta.shape != (k,):
        raise DimensionError("x, theta and V dimensions disagree")
    return _signs(X - theta, matrix_invsqrt(V), single)


def _signs(centered, invsqrt, single=False):
    Z = centered @ invsqrt
    norms = np.sqrt(np.einsum("ij,ij->i", Z, Z))
    at_center = np.all(centered == 0.0, axis=1)
    norms[at_center] = 1.0
    U = Z / norms[:, None]
    U[at_center] = 0.0
    return U[0] if single else U


def vech(A):
    """Column-major stacking of the lower triangle of a square matrix."""
    A = np.asarray(A)
    k = A.shape[-1]
    cols, rows = np.triu_indices(k)
    return A[..., rows, cols]


def vech0(A):
    """``vech`` without its first entry."""
    return vech(A)[..., 1:]


def reduced_dim(k):
    """Dimension ``k(k+1)/2 - 1`` of the reduced sign vectors."""
    return k * (k + 1) // 2 - 1


@functools.lru_cache(maxsize=None)
def _expansion_matrix(k):
    d = reduced_dim(k)
    H = np.zeros((k * k, d))
    cols, rows = np.triu_indices(k)
    # column-major vec index of (i, j) is j*k + i
    for m, (i, j) in enumerate(zip(rows[1:], cols[1:])):
        H[j * k + i, m] = 1.0
        H[i * k + j, m] = 1.0
        if i == j:
            H[0, m] = -1.0
    H.setflags(write=False)
    return H


def expansion_matrix(k):
    """Matrix ``H`` with ``vec(A) = H vech0(A)`` for symmetric trace-zero ``A``.

    The trace constraint determines ``A[0, 0]`` from the other diagonal
    entries, which is why the first ``vech`` component can be dropped.
    """
    return _expansion_matrix(int(k))


def wtilde(x, theta, V):
    """Reduced sign vectors ``vech0(U U^T - I/k)``.

    At ``x == theta`` the sign is zero and so is the reduced sign.  For
    every other ``x``, ``H @ wtilde == vec(U U^T - I/k)``.

    Parameters
    ----------
    x : array_like, shape (k,) or (n, k)
    theta : array_like, shape (k,)
    V : array_like, shape (k, k)

    Returns
    -------
    W : ndarray, shape (d_k,) or (n, d_k)
    """
    U = sign_vector(x, theta, V)
    return reduced_signs(U)


def reduced_signs(U):
    """``vech0(U U^T - I/k)`` for each row of ``U``; zero rows map to zero."""
    U = np.asarray(U, dtype=float)
    single = U.ndim == 1
    U = np.atleast_2d(U)
    k = U.shape[1]
    cols, rows = np.triu_indices(k)
    rows, cols = rows[1:], cols[1:]
    W = U[:, rows] * U[:, cols]
    W[:, rows == cols] -= 1.0 / k
    W[np.all(U == 0.0, axis=1)] = 0.0
    return W[0] if single else W


def full_signs(U):
    """``vec(U U^T - I/k)`` for each row of ``U`` (column-major vec)."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    k = U.shape[1]
    outer = U[:, :, None] * U[:, None, :] - np.eye(k) / k
    return outer.transpose(0, 2, 1).reshape(len(U), k * k)


def explained_variance(V):
    """Cumulative proportions of explained variance.

    Returns
    -------
    p : ndarray, shape (k,)
        ``p[m] = sum of the m+1 largest eigenvalues / sum of all``; the last
        entry is exactly 1.
    """
    w, _ = _spd_eigh(V)
    w = w[::-1]
    p = np.cumsum(w) / np.sum(w)
    p[-1] = 1.0
    return p
