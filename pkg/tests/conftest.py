import functools

import numpy as np
import pytest

from shapedepth.inference import calibrate_critical_values


def random_spd(rng, k, spread=1.0):
    A = rng.standard_normal((k, k)) * spread
    return A @ A.T + 0.1 * np.eye(k)


def random_shape(rng, k=2):
    V = random_spd(rng, k)
    return k * V / np.trace(V)


def brute_origin_count_2d(P, eps=1e-9):
    """Minimal closed-halfplane count by enumeration of all candidate normals.

    The count as a function of the normal angle only changes where the
    boundary line passes through a data point, i.e. at angles alpha_i +- pi/2;
    evaluating at those angles and +-eps around them covers every cell.
    """
    P = np.asarray(P, dtype=float)
    nz = np.any(P != 0, axis=1)
    n_zero = int((~nz).sum())
    if not nz.any():
        return n_zero
    alpha = np.arctan2(P[nz, 1], P[nz, 0])
    crit = np.concatenate([alpha + np.pi / 2, alpha - np.pi / 2])
    angles = np.concatenate([crit, crit + eps, crit - eps])
    U = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    proj = P[nz] @ U.T
    # points within 1e-12 of the boundary lie on it (closed halfplane)
    counts = np.count_nonzero(proj >= -1e-12, axis=0)
    return int(counts.min()) + n_zero


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def square4():
    return np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])


@functools.lru_cache(maxsize=None)
def calibration(n, generator="normal", replicates=100_000, seed=0):
    """Full-size null calibration, computed once per test session."""
    return calibrate_critical_values(2, n, 0.05, replicates, seed, generator=generator)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
