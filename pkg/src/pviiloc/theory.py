"""Population quantities of the PVII_m(0, 1) law.

Every expectation is an integral against ``c_m (1 + x^2)^(-m)``.  The real
line is mapped to (-pi/2, pi/2) by ``x = tan u`` and the endpoints are then
graded, ``pi/2 - |u| = (pi/2) (1 - |s|)^k``, so that the transformed
integrand vanishes at ``s = +-1`` even when ``m < 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pvii import normalizing_constant
from .quadrature import QuadResult, integrate

__all__ = [
    "TheoryConstants",
    "constants",
    "expect",
    "expected_loss",
    "expected_score",
    "kl_divergence",
    "loss_increment",
    "score_variance",
]

DEFAULT_TOL = 1e-10
_HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class TheoryConstants:
    """Closed-form limits for shape ``m``.

    ``fisher`` is the per-observation information, ``asym_var`` the limiting
    variance of ``sqrt(n) * theta_hat``, ``bahadur_slope`` the small-epsilon
    decay constant and ``lil_const`` the iterated-logarithm bound.
    """

    m: float
    c_m: float
    fisher: float
    asym_var: float
    bahadur_slope: float
    lil_const: float


def constants(m: float) -> TheoryConstants:
    c_m = normalizing_constant(m)
    num = m * (2.0 * m - 1.0)
    fisher = num / (m + 1.0)
    asym_var = (m + 1.0) / num
    return TheoryConstants(
        m=float(m),
        c_m=c_m,
        fisher=fisher,
        asym_var=asym_var,
        bahadur_slope=0.5 * fisher,
        lil_const=math.sqrt(2.0 * asym_var),
    )


def _grading(m: float) -> int:
    # integrand ~ (1 - |s|)^(k (2m - 1) - 1) at the ends; keep that >= 1
    return max(2, math.ceil(2.0 / (2.0 * m - 1.0)))


def _to_s(x: float, k: int) -> float:
    eps = _HALF_PI - abs(math.atan(x))
    return math.copysign(1.0 - (eps / _HALF_PI) ** (1.0 / k), x)


def expect(g, m: float, tol: float = DEFAULT_TOL, points=()) -> QuadResult:
    """``E[g(X)]`` for ``X ~ PVII_m(0, 1)``.

    ``g`` must accept numpy arrays.  ``points`` lists abscissae in x where
    ``g`` has features worth a panel boundary.
    """
    c_m = normalizing_constant(m)
    k = _grading(m)
    expo = 2.0 * m - 2.0

    def integrand(s):
        r = 1.0 - np.abs(s)
        eps = _HALF_PI * r**k
        live = eps > 1e-280
        # the transformed integrand tends to 0 where eps underflows
        eps = np.where(live, eps, 1.0)
        x = np.sign(s) / np.tan(eps)
        jac = _HALF_PI * k * r ** (k - 1)
        return np.where(live, g(x) * c_m * np.sin(eps) ** expo * jac, 0.0)

    breaks = [0.0] + [_to_s(float(p), k) for p in points]
    return integrate(integrand, -1.0, 1.0, tol=tol, points=breaks)


def expected_loss(t: float, m: float, tol: float = DEFAULT_TOL) -> float:
    """``F_m(t) = E[log(1 + (X - t)^2)]``."""
    return expect(lambda x: np.log1p((x - t) ** 2), m, tol, points=(t,)).value


def loss_increment(t: float, m: float, tol: float = DEFAULT_TOL) -> float:
    """``F_m(t) - F_m(0)`` integrated as one term, accurate for tiny ``t``."""
    if t == 0:
        return 0.0
    return expect(
        lambda x: np.log1p((t * t - 2.0 * t * x) / (1.0 + x * x)), m, tol, points=(0.0, t)
    ).value


def expected_score(t: float, m: float, tol: float = DEFAULT_TOL) -> float:
    """``G_m(t) = E[D(X, t)]`` with ``D(x, t) = (x - t) / (1 + (x - t)^2)``."""
    return expect(lambda x: (x - t) / (1.0 + (x - t) ** 2), m, tol, points=(t - 1.0, t, t + 1.0)).value


def score_variance(eps: float, m: float, tol: float = DEFAULT_TOL) -> float:
    """``H_m(eps) = Var(D(X, eps))``."""
    second = expect(
        lambda x: ((x - eps) / (1.0 + (x - eps) ** 2)) ** 2, m, tol, points=(eps - 1.0, eps, eps + 1.0)
    ).value
    return second - expected_score(eps, m, tol) ** 2


def kl_divergence(theta1: float, theta2: float, m: float, tol: float = DEFAULT_TOL) -> float:
    """KL divergence of PVII_m(theta2, 1) from PVII_m(theta1, 1).

    Equals ``m (F_m(theta1 - theta2) - F_m(0))``.
    """
    return m * loss_increment(theta1 - theta2, m, tol)
