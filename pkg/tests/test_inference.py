import json

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from shapedepth.depthvalue import DepthValue
from shapedepth.exceptions import DimensionError, DomainError
from shapedepth.inference import (
    Calibration,
    SimulationTable,
    _decide,
    calibrate_critical_values,
    critical_values_from_counts,
    null_statistic_counts,
    power_simulation,
    robustness_simulation,
    shape_test,
    sphericity_alternative,
    standardize,
)
from shapedepth.samplers import EllipticalModel, make_rng, sample_elliptical
from shapedepth.tyler import shape_depth_fixed_theta

from conftest import calibration, random_shape


def toy_calibration(t_count=80, gamma=0.6, n=200):
    return Calibration(2, n, 0.05, t_count, gamma, 100_000, 0)


def test_branch_rule():
    c = toy_calibration()
    assert c.t_crit == 0.40
    assert _decide(60, c, None) == ("reject", None)        # T = 0.30
    assert _decide(90, c, None) == ("accept", None)        # T = 0.45
    assert _decide(80, c, 0.59)[0] == "randomized-reject"
    assert _decide(80, c, 0.61)[0] == "randomized-accept"


def test_critical_values_from_counts():
    counts = np.array([1] * 3 + [2] * 4 + [3] * 93)
    t, g, degenerate = critical_values_from_counts(counts, 10, 0.05)
    assert (t, degenerate) == (2, False)
    assert g == pytest.approx((0.05 - 0.03) / 0.04)
    # size is exactly alpha: P(T < t) + g P(T = t)
    assert 0.03 + g * 0.04 == pytest.approx(0.05)


def test_alpha_one_always_rejects():
    c = calibrate_critical_values(2, 30, alpha=1.0, replicates=1000)
    counts = null_statistic_counts(2, 30, 1000, 0)
    assert c.t_count == counts.max()
    assert c.gamma_rand == 1.0


def test_calibration_lattice_and_json():
    c = calibrate_critical_values(2, 50, replicates=2000, seed=4)
    assert 0 <= c.gamma_rand <= 1
    d = Calibration.from_json(c.to_json())
    assert d == c
    obj = json.loads(c.to_json())
    obj["t_crit"] = 0.123
    with pytest.raises(DomainError):
        Calibration.from_dict(obj)


def test_calibration_needs_replicates():
    with pytest.raises(DomainError):
        calibrate_critical_values(2, 50, replicates=10)


def test_statistic_is_lattice_valued():
    counts = null_statistic_counts(2, 37, 3000, seed=1)
    assert counts.dtype.kind == "i"
    assert counts.min() >= 0 and counts.max() <= 37


def test_statistic_invariance(rng):
    V0 = random_shape(rng)
    X = sample_elliptical(EllipticalModel(V0), 200, 3)
    theta = np.zeros(2)
    out = shape_test(X, theta, V0, toy_calibration(), seed=1)
    assert out.statistic == shape_depth_fixed_theta(X, theta, V0)
    assert out.statistic == shape_depth_fixed_theta(standardize(X, theta, V0), theta,
                                                    np.eye(2))


def test_randomization_draw_recorded():
    X = sample_elliptical(EllipticalModel(np.eye(2)), 200, 5)
    T = shape_depth_fixed_theta(X, [0, 0], np.eye(2))
    c = toy_calibration(t_count=T.count, gamma=0.5)
    out = shape_test(X, [0, 0], np.eye(2), c, seed=2)
    assert out.rand_draw is not None
    assert out.decision.startswith("randomized")
    again = shape_test(X, [0, 0], np.eye(2), c, seed=2)
    assert again == out


def test_calibration_dimension_checked():
    X = sample_elliptical(EllipticalModel(np.eye(2)), 100, 5)
    with pytest.raises(DimensionError):
        shape_test(X, [0, 0], np.eye(2), toy_calibration())


def test_null_level():
    c = calibration(200)
    X = [sample_elliptical(EllipticalModel(np.diag([2.0, 0.5])), 200, make_rng(9, r))
         for r in range(3000)]
    rejected = sum(shape_test(x, [0, 0], np.diag([2.0, 0.5]), c, seed=r).rejected
                   for r, x in enumerate(X))
    assert abs(rejected / 3000 - 0.05) <= 0.01


def test_power_curve():
    t = power_simulation(calibration(500), ells=range(7), replications=1000)
    f = t.frequencies
    assert abs(f[0] - 0.05) <= 0.015
    drops = np.diff(f)[np.diff(f) < 0]
    assert len(drops) <= 1 and np.all(drops >= -0.02)
    assert f[6] >= 0.8
    # regression baseline: seed 0, 1000 replications
    assert t.rejections == [61, 76, 172, 331, 572, 771, 905]


@pytest.mark.parametrize("n", [
    200,
    pytest.param(500, marks=pytest.mark.xfail(
        strict=True, reason="gamma differs by 0.066; the standard error of a difference of "
        "two 100000-replicate estimates is about 0.07 at n=500")),
])
def test_null_distribution_free(n):
    normal, cauchy = calibration(n), calibration(n, "cauchy")
    assert normal.t_count == cauchy.t_count
    assert abs(normal.gamma_rand - cauchy.gamma_rand) <= 0.03


def test_power_rejects_indefinite_alternative():
    with pytest.raises(DomainError):
        power_simulation(toy_calibration(), ells=[30], xi=0.035, replications=10)
    assert np.linalg.eigvalsh(sphericity_alternative(6, 0.035)).min() > 0


@pytest.mark.parametrize("generator", ["normal", "cauchy"])
def test_robustness_null_point(generator):
    t = robustness_simulation(calibration(200, generator), etas=[0.0], generator=generator,
                              replications=1000)
    assert abs(t.frequencies[0] - 0.05) <= 0.015


def test_robustness_patterns_share_null():
    c = toy_calibration(79, 0.65)
    a = robustness_simulation(c, etas=[0.0], pattern="a", replications=300)
    b = robustness_simulation(c, etas=[0.0], pattern="b", replications=300)
    assert a.rejections == b.rejections


def test_robustness_regression_value():
    # regression baseline for pattern (c) at eta = 0.3, seed 0, 1000 replications
    c = calibration(200)
    t = robustness_simulation(c, etas=[0.3], pattern="c", replications=1000)
    assert t.rejections[0] == ROBUST_C_BASELINE


def test_tables_reproducible():
    c = toy_calibration(79, 0.65)
    a = power_simulation(c, ells=[0, 3], replications=200, seed=3).to_csv()
    b = power_simulation(c, ells=[0, 3], replications=200, seed=3).to_csv()
    assert a == b
    t = SimulationTable.from_csv(a)
    assert t.to_csv() == a


def test_unknown_pattern():
    with pytest.raises(DomainError):
        robustness_simulation(toy_calibration(), pattern="d", replications=5)


ROBUST_C_BASELINE = 374
