"""The Pearson Type VII location-scale family.

The density is ``c_m / sigma * (1 + ((x - mu) / sigma)**2) ** -m`` for
``m > 1/2``.  With ``nu = 2m - 1`` it is a rescaled Student t: if
``T ~ t_nu`` then ``mu + sigma * T / sqrt(nu)`` has this law, which drives
both the CDF and the sampler below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special import betainc

__all__ = [
    "DistParams",
    "SampleVec",
    "as_sample",
    "cdf",
    "density",
    "log_density",
    "make_rng",
    "normalizing_constant",
    "quantile",
    "sample",
]

_SEED_LIMIT = 2**64


def _check_shape(m: float) -> float:
    m = float(m)
    if not m > 0.5 or not math.isfinite(m):
        raise ValueError(f"shape m must be a finite number > 1/2, got {m!r}")
    return m


@dataclass(frozen=True)
class DistParams:
    """Shape ``m``, location ``mu`` and scale ``sigma`` of PVII_m(mu, sigma)."""

    m: float
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "m", _check_shape(self.m))
        if not self.sigma > 0 or not math.isfinite(self.sigma):
            raise ValueError(f"scale sigma must be finite and > 0, got {self.sigma!r}")
        if not math.isfinite(self.mu):
            raise ValueError(f"location mu must be finite, got {self.mu!r}")

    @property
    def dof(self) -> float:
        """Degrees of freedom of the matching Student t, ``2m - 1``."""
        return 2.0 * self.m - 1.0


@dataclass(frozen=True, eq=False)
class SampleVec:
    """Immutable finite sample; ``values`` is a read-only float64 array."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float).ravel()
        if arr.size < 1:
            raise ValueError("a sample needs at least one observation")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample contains NaN or infinite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def as_sample(s) -> SampleVec:
    return s if isinstance(s, SampleVec) else SampleVec(s)


def normalizing_constant(m: float) -> float:
    """``c_m = Gamma(m) / (sqrt(pi) Gamma(m - 1/2))``."""
    m = _check_shape(m)
    return math.exp(math.lgamma(m) - math.lgamma(m - 0.5)) / math.sqrt(math.pi)


def log_density(x, p: DistParams):
    y = (np.asarray(x, dtype=float) - p.mu) / p.sigma
    out = math.log(normalizing_constant(p.m)) - math.log(p.sigma) - p.m * np.log1p(y * y)
    return float(out) if np.ndim(out) == 0 else out


def density(x, p: DistParams):
    return np.exp(log_density(x, p))


def _upper_tail(ay, m: float):
    """``P(Y > ay)`` for ``ay >= 0`` under PVII_m(0, 1), without cancellation."""
    ay = np.asarray(ay, dtype=float)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        small = ay <= 1.0
        inv = 1.0 / ay
        z = np.where(small, 1.0 / (1.0 + ay * ay), inv * inv / (1.0 + inv * inv))
        zc = np.where(small, ay * ay / (1.0 + ay * ay), 1.0 / (1.0 + inv * inv))
    return 0.5 * betainc(m - 0.5, 0.5, z, zc)


def cdf(x, p: DistParams):
    """Distribution function via ``I_z(m - 1/2, 1/2)`` with ``z = 1/(1+y^2)``."""
    y = (np.asarray(x, dtype=float) - p.mu) / p.sigma
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    tail = _upper_tail(np.abs(y), p.m)
    out = np.where(y > 0, 1.0 - tail, tail)
    out = np.where(y == 0, 0.5, out)
    return float(out[0]) if scalar else out


def quantile(q: float, p: DistParams) -> float:
    """Inverse CDF by bisection on the standardized scale.

    The search runs on the tail probability ``min(q, 1 - q)`` so that
    extreme levels keep their relative accuracy.
    """
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {q!r}")
    if q == 0.5:
        return p.mu
    upper = q > 0.5
    target = 1.0 - q if upper else q
    tail = lambda y: float(_upper_tail(y, p.m))
    hi = math.tan(math.pi * (0.5 - target)) * max(1.0, math.sqrt(p.dof))
    lo = 0.0
    while tail(hi) > target:
        lo, hi = hi, 2.0 * hi
        if not math.isfinite(hi):
            raise ArithmeticError(f"quantile bracket overflowed for q={q!r}")
    while hi - lo > 1e-12 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if tail(mid) > target:
            lo = mid
        else:
            hi = mid
    y = 0.5 * (lo + hi)
    return p.mu + p.sigma * (y if upper else -y)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, stream)``.

    Philox takes a 128-bit key; the low word is the seed and the high word
    the stream index, so streams never overlap and need no coordination.
    """
    seed = int(seed)
    stream = int(stream)
    if not 0 <= seed < _SEED_LIMIT or not 0 <= stream < _SEED_LIMIT:
        raise ValueError("seed and stream must be integers in [0, 2**64)")
    return np.random.Generator(np.random.Philox(key=seed + (stream << 64)))


def standard_draws(count: int, m: float, rng: np.random.Generator) -> np.ndarray:
    """Draws from PVII_m(0, 1): ``Z / sqrt(chi2_nu)`` with ``nu = 2m - 1``.

    The normals are drawn before the gammas, in one call each.
    """
    m = _check_shape(m)
    z = rng.standard_normal(count)
    chi2 = 2.0 * rng.standard_gamma(0.5 * (2.0 * m - 1.0), count)
    with np.errstate(divide="ignore"):
        out = z / np.sqrt(chi2)
    if not np.all(np.isfinite(out)):
        raise ArithmeticError("chi-square draw underflowed to zero")
    return out


def sample(count: int, p: DistParams, rng: np.random.Generator) -> SampleVec:
    if int(count) < 1:
        raise ValueError("count must be a positive integer")
    return SampleVec(p.mu + p.sigma * standard_draws(int(count), p.m, rng))
