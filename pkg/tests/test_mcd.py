from itertools import combinations

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from shapedepth.exceptions import DomainError
from shapedepth.mcd import (
    GammaCurve,
    contamination_spec,
    gamma_depth_curve,
    mcd_subset,
    principal_angle,
    principal_direction_mse,
    select_gamma_max_depth,
    subset_size,
)
from shapedepth.samplers import (
    EllipticalModel,
    MixtureSpec,
    make_rng,
    sample_elliptical,
    sample_mixture,
)
from shapedepth.spd import normalize_to_shape
from shapedepth.tyler import shape_depth

V16 = np.diag([1.6, 0.4])


def exhaustive_min_det(X, h):
    best = np.inf
    for idx in combinations(range(len(X)), h):
        best = min(best, np.linalg.det(np.cov(X[list(idx)].T, bias=True)))
    return best


def test_subset_size():
    assert subset_size(0.5, 12) == 6
    assert subset_size(0.7, 12) == 9
    assert subset_size(2 / 3, 12) == 8
    assert subset_size(0.8, 400) == 320
    with pytest.raises(DomainError):
        subset_size(0.4, 10)


def test_full_sample():
    X = sample_elliptical(EllipticalModel(V16), 50, 1)
    r = mcd_subset(X, 1.0)
    assert_array_equal(r.subset, np.arange(50))
    assert_allclose(r.scatter, np.cov(X.T, bias=True), rtol=1e-12)
    assert_allclose(r.location, X.mean(axis=0))


def test_result_invariants(rng):
    X = rng.standard_normal((60, 3))
    r = mcd_subset(X, 0.75, n_starts=20)
    assert r.determinant == pytest.approx(np.linalg.det(r.scatter), rel=1e-8)
    assert_array_equal(r.shape.entries, normalize_to_shape(r.scatter).entries)
    assert abs(np.trace(r.shape.entries) - 3) < 1e-8
    assert len(r.subset) == 45


def test_determinant_path_nonincreasing(rng):
    for _ in range(20):
        X = rng.standard_normal((40, 2)) * [3, 1]
        X[:8] += 6
        r = mcd_subset(X, 0.6, n_starts=10, seed=int(rng.integers(1000)))
        assert np.all(np.diff(r.determinant_path) <= 1e-12 * r.determinant_path[0])


def test_exhaustive_oracle(rng):
    equal, worst = 0, 1.0
    for _ in range(100):
        X = rng.standard_normal((12, 2)) @ rng.standard_normal((2, 2))
        r = mcd_subset(X, 8 / 12, n_starts=50, seed=int(rng.integers(10**6)))
        m = exhaustive_min_det(X, 8)
        ratio = r.determinant / m
        worst = max(worst, ratio)
        equal += ratio < 1 + 1e-9
    assert worst <= 1.05
    assert equal >= 80


def test_far_outliers_excluded(rng):
    X = rng.standard_normal((12, 2))
    X[[2, 5, 7, 11]] += [[100.0, 0], [0, 100.0], [-100.0, 0], [0, -100.0]]
    r = mcd_subset(X, 2 / 3)
    assert not set(r.subset) & {2, 5, 7, 11}
    # with h = ceil(0.7 * 12) = 9 one outlier has to enter
    r = mcd_subset(X, 0.7)
    assert len(set(r.subset) & {2, 5, 7, 11}) == 1


def test_permutation_invariance(rng):
    X = rng.standard_normal((30, 2)) * [2, 1]
    X[:5] += [8, 8]
    p = rng.permutation(30)
    a = mcd_subset(X, 0.75, seed=3)
    b = mcd_subset(X[p], 0.75, seed=3)
    assert set(p[b.subset]) == set(a.subset)
    assert_allclose(b.scatter, a.scatter, rtol=1e-10)


def test_curve_full_sample_entry():
    X = sample_elliptical(EllipticalModel(V16), 300, 2)
    c = gamma_depth_curve(X, [0.75, 1.0], n_starts=20)
    assert c.depths[-1] == shape_depth(X, normalize_to_shape(np.cov(X.T)).entries)
    assert c.subset_sizes.tolist() == [225, 300]


def test_curve_clean_data():
    X = sample_elliptical(EllipticalModel(V16), 800, 3)
    c = gamma_depth_curve(X, [1.0])
    assert len(c.depths) == 1 and float(c.depths[0]) >= 0.4


def test_curve_kink():
    X, _ = sample_mixture(contamination_spec(5.0, 0.2), 400, make_rng(0, 3, 0))
    c = gamma_depth_curve(X, [0.8, 0.9])
    assert c.values()[0] - c.values()[1] >= 0.05


def test_curve_duplicated_data():
    X = sample_elliptical(EllipticalModel(V16), 100, 3)
    g = [0.5, 0.6, 0.75, 0.9, 1.0]
    a = gamma_depth_curve(X, g, n_starts=50)
    b = gamma_depth_curve(np.vstack([X, X]), g, n_starts=50)
    assert_allclose(a.values(), b.values(), atol=0)


def test_curve_csv():
    c = GammaCurve(np.array([0.5, 1.0]), [0.25, 0.5], np.array([2, 4]))
    assert c.to_csv() == "gamma,depth,subset_size\n0.5,0.25,2\n1.0,0.5,4\n"
    with pytest.raises(DomainError):
        GammaCurve(np.array([1.0, 0.5]), [0, 0], np.array([1, 1]))


def test_select_singleton():
    X = sample_elliptical(EllipticalModel(V16), 100, 4)
    assert select_gamma_max_depth(X, [0.7], n_starts=20).gamma == 0.7


def test_select_clean_spherical_prefers_no_trimming():
    # all candidate shapes are near I, so this is a frequency statement
    hits = sum(select_gamma_max_depth(
        sample_elliptical(EllipticalModel(np.eye(2)), 800, make_rng(77, s)),
        [0.5, 0.75, 1.0], n_starts=50).gamma == 1.0 for s in range(10))
    assert hits >= 5


def test_select_shape_contaminated():
    # 20% outliers with identity shape, four times as spread as the clean part
    spec = MixtureSpec(EllipticalModel(np.diag([2.0, 0.5])), "sphere-scaled-4", 0.2)
    for s in range(3):
        X, _ = sample_mixture(spec, 400, make_rng(5 + s))
        sel = select_gamma_max_depth(X, np.linspace(0.5, 1.0, 11), n_starts=50)
        assert sel.gamma <= 0.85
        assert len(sel.depths) == 11


@pytest.mark.xfail(strict=True, reason="depth against the contaminated sample favours "
                   "shapes that absorb part of the +-Y outliers; argmax sits at 0.85-0.9")
def test_select_location_contaminated():
    X, _ = sample_mixture(contamination_spec(5.0, 0.2), 400, make_rng(5))
    sel = select_gamma_max_depth(X, np.linspace(0.5, 1.0, 11), n_starts=50)
    assert sel.gamma <= 0.85


def test_select_ties_go_to_larger_gamma():
    # two concentric regular 16-gons: the inner ring and the full sample both have shape I
    t = 0.1 + np.arange(16) * 2 * np.pi / 16
    ring = np.c_[np.cos(t), np.sin(t)]
    X = np.vstack([ring, 2.5 * ring])
    sel = select_gamma_max_depth(X, [0.5, 1.0], n_starts=20)
    assert sel.depths[0.5] == sel.depths[1.0]
    assert sel.gamma == 1.0


def test_principal_angle():
    assert principal_angle(np.diag([4.0, 1.0])) == 0.0
    R = np.array([[1, -1], [1, 1]]) / np.sqrt(2)
    assert principal_angle(R @ np.diag([4.0, 1.0]) @ R.T) == pytest.approx(np.pi / 4)


def test_mse_curve_small():
    c = principal_direction_mse(replications=10, gammas=[0.7, 0.8, 0.9], n_starts=30)
    assert c.argmin() in (0.7, 0.8)
    assert c.mse[2] > 10 * c.mse[1]
    assert c.to_csv().splitlines()[0] == "gamma,mse,replications"
