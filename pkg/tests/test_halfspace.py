import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from shapedepth.depthvalue import DepthValue
from shapedepth.exceptions import DomainError
from shapedepth.halfspace import (
    DirectionBudget,
    candidate_directions,
    min_counts_2d,
    origin_depth,
    origin_depth_approx,
    origin_depth_exact_1d,
    origin_depth_exact_2d,
    tukey_depth,
    tukey_median,
)

from conftest import brute_origin_count_2d


def test_exact_1d_examples():
    assert origin_depth_exact_1d([-1, 1]) == DepthValue(1, 2)
    assert origin_depth_exact_1d([1, 2, 3]) == 0
    d = origin_depth_exact_1d([-1, 0, 2, 5])
    assert str(d) == "2/4"


def test_exact_2d_examples(square4):
    assert str(origin_depth_exact_2d(square4)) == "2/4"
    ang = np.deg2rad([0, 120, 240])
    assert origin_depth_exact_2d(np.c_[np.cos(ang), np.sin(ang)]) == DepthValue(1, 3)
    P = np.random.default_rng(0).uniform(0.1, 1, (30, 2)) * [1, 1]
    P[:, 1] -= 0.5
    assert origin_depth_exact_2d(P).count == 0


def test_exact_2d_matches_enumeration(rng):
    for _ in range(200):
        n = int(rng.integers(1, 101))
        P = rng.standard_normal((n, 2)) + rng.normal(0, 0.5, 2)
        if rng.random() < 0.3:
            # ties in angle and points at the origin
            P[: n // 3] = P[0] * rng.uniform(0.5, 2, (n // 3, 1))
            P[n // 3: n // 3 + 2] = 0.0
        assert origin_depth_exact_2d(P).count == brute_origin_count_2d(P)


def test_batched_counts_agree(rng):
    clouds = rng.standard_normal((50, 40, 2))
    clouds[3, :5] = 0.0
    expected = [origin_depth_exact_2d(c).count for c in clouds]
    assert min_counts_2d(clouds).tolist() == expected


def test_rotation_invariance(rng):
    P = rng.standard_normal((60, 2)) + [0.3, -0.1]
    d0 = origin_depth_exact_2d(P)
    for t in rng.uniform(0, 2 * np.pi, 100):
        R = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
        assert origin_depth_exact_2d(P @ R.T) == d0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=1, max_size=25))
def test_duplication_and_lattice(pts):
    P = np.array(pts, dtype=float)
    d = origin_depth_exact_2d(P)
    assert 0 <= d.count <= d.n == len(P)
    assert origin_depth_exact_2d(np.vstack([P, P])) == d
    assert d.count == brute_origin_count_2d(P)


def test_approx_matches_exact_in_plane(square4, rng):
    for budget in [DirectionBudget(0), DirectionBudget(10), DirectionBudget(500, seed=3)]:
        assert str(origin_depth_approx(square4, budget)) == "2/4"
    P = rng.standard_normal((40, 2))
    assert origin_depth_approx(P) == origin_depth_exact_2d(P)


def test_approx_zero_when_separable(rng):
    P = rng.standard_normal((50, 4))
    P[:, 0] = np.abs(P[:, 0]) + 0.1
    # the normal e1 is among the data directions (the points themselves are close to it)
    budget = DirectionBudget(n_random=2000, seed=1)
    assert origin_depth_approx(P, budget) == 0


def test_approx_deterministic(rng):
    P = rng.standard_normal((80, 5))
    b = DirectionBudget(300, seed=11)
    assert origin_depth_approx(P, b) == origin_depth_approx(P, b)
    assert np.array_equal(candidate_directions(P, b), candidate_directions(P, b))


def test_approx_monotone_in_budget(rng):
    P = rng.standard_normal((100, 5)) + 0.2
    small = DirectionBudget(n_random=100, use_data_directions=False, seed=2)
    large = DirectionBudget(n_random=5000, use_data_directions=False, seed=2)
    Ds, Dl = candidate_directions(P, small), candidate_directions(P, large)
    assert np.array_equal(Dl[:100], Ds)
    assert origin_depth_approx(P, small) >= origin_depth_approx(P, large)


def test_approx_upper_bounds_truth_in_3d(rng):
    # symmetric cloud: exact depth is 1/2, any direction set gives at least that
    P = rng.standard_normal((30, 3))
    P = np.vstack([P, -P])
    assert origin_depth(P) == DepthValue(1, 2)


def test_empty_budget_rejected():
    with pytest.raises(DomainError):
        DirectionBudget(0, use_data_directions=False)


def test_tukey_depth_examples(square4):
    assert tukey_depth([1.0, 2.0], [[1.0, 2.0]]) == 1
    assert str(tukey_depth([0, 0], square4)) == "2/4"
    assert tukey_depth([10, 10], square4) == 0


def test_tukey_median_examples(square4, rng):
    assert_allclose(tukey_median([[1.0, 2.0]]), [1.0, 2.0])
    m = tukey_median(square4)
    assert_allclose(m, [0, 0], atol=1e-9)
    assert str(tukey_depth(m, square4)) == "2/4"
    P = rng.standard_normal((60, 2))
    b = np.array([3.0, -7.0])
    assert_allclose(tukey_median(P + b), tukey_median(P) + b, atol=1e-9)


def test_tukey_median_is_deep(rng):
    P = rng.standard_normal((200, 2)) * [2, 0.5]
    m = tukey_median(P)
    best = max(tukey_depth(p, P).count for p in P)
    assert tukey_depth(m, P).count >= best
