import json

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from shapedepth.exceptions import DimensionError, DomainError
from shapedepth.spd import (
    ShapeMatrix,
    expansion_matrix,
    explained_variance,
    full_signs,
    geodesic_distance,
    matrix_exp,
    matrix_invsqrt,
    matrix_log,
    matrix_sqrt,
    normalize_to_shape,
    reduced_dim,
    sign_vector,
    transform_shape,
    vech,
    vech0,
    wtilde,
)

from conftest import random_shape, random_spd


# -- matrix functions --------------------------------------------------------

def test_sqrt_of_identity():
    assert_allclose(matrix_sqrt(np.eye(2)), np.eye(2), atol=1e-15)


def test_sqrt_of_diagonal():
    assert_allclose(matrix_sqrt(np.diag([4.0, 1.0])), np.diag([2.0, 1.0]), atol=1e-14)


def test_sqrt_squares_back(rng):
    for _ in range(1000):
        k = rng.integers(2, 6)
        V = random_spd(rng, k)
        S = matrix_sqrt(V)
        assert np.linalg.norm(S @ S - V) < 1e-10
        assert_allclose(S, S.T, atol=0)
        assert np.linalg.eigvalsh(S).min() > 0


def test_invsqrt_and_log_exp(rng):
    V = random_spd(rng, 3)
    assert_allclose(matrix_invsqrt(V) @ V @ matrix_invsqrt(V), np.eye(3), atol=1e-10)
    assert_allclose(matrix_exp(matrix_log(V)), V, rtol=1e-10)


@pytest.mark.parametrize("bad", [np.diag([1.0, -1.0]), np.diag([1.0, 0.0]),
                                 np.array([[1.0, 2.0], [0.0, 1.0]])])
def test_non_spd_rejected(bad):
    with pytest.raises(DomainError):
        matrix_sqrt(bad)


def test_geodesic_distance_examples():
    I = np.eye(2)
    assert geodesic_distance(I, I) == pytest.approx(0.0, abs=1e-14)
    V = np.diag([1.6, 0.4])
    expected = np.hypot(np.log(1.6), np.log(0.4))
    assert geodesic_distance(I, V) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(1.0298, abs=1e-4)


def test_geodesic_distance_metric_axioms(rng):
    for _ in range(200):
        A, B, C = (random_shape(rng, 3) for _ in range(3))
        dab = geodesic_distance(A, B)
        assert dab == pytest.approx(geodesic_distance(B, A), rel=1e-9)
        assert dab <= geodesic_distance(A, C) + geodesic_distance(C, B) + 1e-9
        assert dab > 0


def test_geodesic_distance_blows_up_near_boundary():
    eps = np.geomspace(0.5, 1e-8, 12)
    d = [geodesic_distance(np.eye(2), np.diag([2 - e, e])) for e in eps]
    assert np.all(np.diff(d) > 0)
    assert d[-1] > 15


# -- shape matrices ----------------------------------------------------------

def test_normalize_examples():
    assert_allclose(normalize_to_shape(np.diag([2.0, 2.0])).entries, np.eye(2))
    assert_allclose(normalize_to_shape(np.diag([4.0, 1.0])).entries, np.diag([1.6, 0.4]))


def test_normalize_idempotent(rng):
    for _ in range(50):
        V = normalize_to_shape(random_spd(rng, 4))
        W = normalize_to_shape(V)
        assert_allclose(W.entries, V.entries, rtol=1e-14)
        assert np.trace(W.entries) == pytest.approx(4, abs=1e-12)


def test_shape_matrix_invariants():
    with pytest.raises(DomainError):
        ShapeMatrix(np.diag([2.0, 1.0]))  # trace 3
    with pytest.raises(DomainError):
        ShapeMatrix(np.array([[1.0, 0.5], [0.4, 1.0]]))
    with pytest.raises(DomainError):
        ShapeMatrix(np.diag([2.5, -0.5]))
    V = ShapeMatrix(np.diag([1.6, 0.4]))
    assert V.k == 2
    assert_array_equal(np.asarray(V), np.diag([1.6, 0.4]))


def test_shape_json_round_trip(rng):
    V = normalize_to_shape(random_spd(rng, 3))
    W = ShapeMatrix.from_json(V.to_json())
    assert_array_equal(W.entries, V.entries)
    obj = {"k": 2, "entries": [[4, 0], [0, 1]], "normalize": True}
    assert_allclose(ShapeMatrix.from_json(json.dumps(obj)).entries, np.diag([1.6, 0.4]))
    with pytest.raises(DomainError):
        ShapeMatrix.from_json(json.dumps({"k": 2, "entries": [[4, 0], [0, 1]]}))
    with pytest.raises(DimensionError):
        ShapeMatrix.from_json(json.dumps({"k": 3, "entries": [[1, 0], [0, 1]]}))


def test_transform_shape_matches_definition(rng):
    A = rng.standard_normal((3, 3))
    V = random_shape(rng, 3)
    B = A @ V @ A.T
    assert_allclose(transform_shape(A, V).entries, 3 * B / np.trace(B), rtol=1e-12)


# -- signs and the reduced representation ------------------------------------

def test_sign_vector_examples():
    assert_allclose(sign_vector([1, 0], [0, 0], np.eye(2)), [1, 0])
    assert_array_equal(sign_vector([2, 3], [2, 3], np.eye(2)), [0, 0])
    assert_allclose(sign_vector([0, 3], [0, 0], np.diag([1.6, 0.4])), [0, 1], atol=1e-15)


def test_sign_norm_is_zero_or_one(rng):
    X = rng.standard_normal((500, 3))
    X[::7] = 0.0
    U = sign_vector(X, np.zeros(3), random_shape(rng, 3))
    norms = np.linalg.norm(U, axis=1)
    assert_array_equal(norms[::7], 0.0)
    mask = np.ones(500, bool)
    mask[::7] = False
    assert_allclose(norms[mask], 1.0, atol=1e-15)


def test_wtilde_examples():
    assert_allclose(wtilde([1, 0], [0, 0], np.eye(2)), [0, -0.5], atol=1e-15)
    assert_allclose(wtilde(np.array([1, 1]) / np.sqrt(2), [0, 0], np.eye(2)), [0.5, 0],
                    atol=1e-15)
    assert_array_equal(wtilde([3, 3], [3, 3], np.eye(2)), [0, 0])
    assert_array_equal(wtilde([1, 1, 1], [1, 1, 1], np.eye(3)), np.zeros(5))


@pytest.mark.parametrize("k", [2, 3, 4])
def test_expansion_identity(rng, k):
    H = expansion_matrix(k)
    assert H.shape == (k * k, reduced_dim(k))
    for _ in range(1000 // 3):
        V = random_shape(rng, k)
        X = rng.standard_normal((3, k))
        W = wtilde(X, np.zeros(k), V)
        U = sign_vector(X, np.zeros(k), V)
        assert_allclose(W @ H.T, full_signs(U), atol=1e-15)


def test_vech_column_major():
    A = np.array([[1, 2, 3], [2, 4, 5], [3, 5, 6]])
    assert_array_equal(vech(A), [1, 2, 3, 4, 5, 6])
    assert_array_equal(vech0(A), [2, 3, 4, 5, 6])
    assert reduced_dim(2) == 2 and reduced_dim(3) == 5


def test_explained_variance():
    assert_allclose(explained_variance(np.eye(2)), [0.5, 1.0])
    assert_allclose(explained_variance(np.diag([1.6, 0.4])), [0.8, 1.0])
    p = explained_variance(random_shape(np.random.default_rng(1), 5))
    assert p[-1] == 1.0
    assert np.all(np.diff(p) >= 0)
