"""Regularized incomplete beta function by Lentz's continued fraction."""

import math

import numpy as np

_TINY = 1e-300
_EPS = 1e-15
_MAXIT = 500


def _betacf(a, b, x):
    """Continued fraction for I_x(a, b), vectorized over ``x``."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, _MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h = np.where(active, h * d * c, h)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= _EPS
        if not active.any():
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b})")


def betainc(a, b, x, xc=None):
    """Regularized incomplete beta ``I_x(a, b)``.

    ``xc`` optionally supplies ``1 - x`` computed without cancellation; the
    complement branch uses it directly.  Scalars in give a float back.
    """
    if a <= 0 or b <= 0:
        raise ValueError("betainc requires a > 0 and b > 0")
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    xc_arr = 1.0 - x_arr if xc is None else np.atleast_1d(np.asarray(xc, dtype=float))
    if np.any((x_arr < 0) | (x_arr > 1)):
        raise ValueError("betainc requires 0 <= x <= 1")

    out = np.empty_like(x_arr)
    lbeta = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    zero = x_arr == 0.0
    one = xc_arr == 0.0
    mid = ~(zero | one)
    out[zero] = 0.0
    out[one & ~zero] = 1.0
    if mid.any():
        xm = x_arr[mid]
        xcm = xc_arr[mid]
        front = np.exp(lbeta + a * np.log(xm) + b * np.log(xcm))
        direct = xm < (a + 1.0) / (a + b + 2.0)
        res = np.empty_like(xm)
        if direct.any():
            res[direct] = front[direct] * _betacf(a, b, xm[direct]) / a
        if (~direct).any():
            res[~direct] = 1.0 - front[~direct] * _betacf(b, a, xcm[~direct]) / b
        out[mid] = res
    return float(out[0]) if scalar else out
