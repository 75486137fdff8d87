"""Regularized incomplete beta function and the boxplot fence."""

import math

import numpy as np

from .exceptions import DomainError

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 1000


def _betacf(a, b, x):
    # modified Lentz evaluation of the continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"continued fraction did not converge for a={a}, b={b}, x={x}")


def beta_cdf(a, b, x):
    """Regularized incomplete beta function ``I_x(a, b)``.

    Parameters
    ----------
    a, b : float
        Positive shape parameters.
    x : float
        Point in ``[0, 1]``.

    Returns
    -------
    float
        ``P(Y <= x)`` for ``Y ~ Beta(a, b)``.
    """
    a = float(a)
    b = float(b)
    x = float(x)
    if not (a > 0 and b > 0):
        raise DomainError("beta parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x={x} outside [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return min(1.0, front * _betacf(a, b, x) / a)
    return max(0.0, 1.0 - front * _betacf(b, a, 1.0 - x) / b)


def boxplot_lower_fence(values):
    """Lower whisker limit ``Q1 - 1.5 IQR`` with linearly interpolated quartiles.

    Raises
    ------
    DomainError
        If fewer than four values are given.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 4:
        raise DomainError("need at least four values for a boxplot fence")
    q1, q3 = np.percentile(v, [25, 75], method="linear")
    return float(q1 - 1.5 * (q3 - q1))
