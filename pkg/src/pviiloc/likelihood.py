"""Empirical loss, score equation and the location MLE.

For a sample ``x_1..x_n`` the loss is ``L_n(t) = mean(log(1 + (x_i - t)^2))``
and its stationary points are the roots of the score
``D_n(t) = mean((x_i - t) / (1 + (x_i - t)^2))``, since ``L_n' = -2 D_n``.
The score equation does not involve the shape ``m``, so nothing here does
either.  ``D_n`` may have any odd number of roots; the global estimator
enumerates all of them and keeps the one with the smallest loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .pvii import SampleVec, as_sample

__all__ = [
    "ConvergenceError",
    "LikelihoodEval",
    "MleResult",
    "ResolutionError",
    "RootSet",
    "evaluate",
    "find_roots",
    "loss",
    "mle",
    "score",
    "score_curvature",
    "score_slope",
]

SCAN_STEP = 0.05
MAX_HALVINGS = 8
TIE_TOL = 1e-10
LOCAL_MAX_STEPS = 100

METHODS = ("global", "local_from_median")


class ResolutionError(ArithmeticError):
    """Root enumeration could not certify every interval at the finest step."""


class ConvergenceError(ArithmeticError):
    """The local Newton iteration did not converge."""


def _values(s) -> np.ndarray:
    return as_sample(s).values


def loss(t: float, s) -> float:
    return kernels.loss(_values(s), float(t))


def score(t: float, s) -> float:
    return kernels.score(_values(s), float(t))


def score_slope(t: float, s) -> float:
    """Mean of ``d/dt D(x_i, t) = ((x_i - t)^2 - 1) / (1 + (x_i - t)^2)^2``."""
    return kernels.score_slope(_values(s), float(t))


def score_curvature(t: float, s) -> float:
    return kernels.score_curvature(_values(s), float(t))


@dataclass(frozen=True)
class LikelihoodEval:
    t: float
    loss: float
    score: float
    score_slope: float


def evaluate(t: float, s) -> LikelihoodEval:
    x = _values(s)
    t = float(t)
    return LikelihoodEval(t, kernels.loss(x, t), kernels.score(x, t), kernels.score_slope(x, t))


@dataclass(frozen=True, eq=False)
class RootSet:
    """All real roots of ``D_n``, ascending, each with its bracketing interval.

    ``min_width`` is the narrowest interval the scan had to split and
    ``sign_only`` counts roots certified by a sign change alone, without a
    uniqueness proof: odd-order roots such as the triple root of {-1, 1},
    or roots next to outliers so large that neighbouring doubles straddle them.
    """

    roots: np.ndarray
    brackets: np.ndarray
    parity_ok: bool
    scan_step: float
    min_width: float = 0.0
    sign_only: int = 0

    def __len__(self):
        return self.roots.size


def find_roots(s, scan_step: float = SCAN_STEP, max_halvings: int = MAX_HALVINGS) -> RootSet:
    """Enumerate every root of the score equation.

    The search interval ``[min x - 1, max x + 1]`` is subdivided until each
    piece is proven root-free or proven to hold at most one root (or two
    around a certified single extremum); roots are then polished by
    safeguarded Newton.  Below ``scan_step / 2**max_halvings`` a piece whose
    endpoints differ in sign counts as one root; one without a sign change
    raises :class:`ResolutionError` rather than dropping a possible pair.
    """
    x = _values(s)
    roots, brackets, count, status, min_width, nsign = kernels.find_roots(
        x, float(scan_step), int(max_halvings)
    )
    if status != kernels.STATUS_OK:
        raise ResolutionError(
            f"root scan failed (status {status}) at interval width {min_width:.3e}"
        )
    roots = np.array(roots[:count])
    brackets = np.array(brackets[:count]).reshape(-1, 2)
    parity_ok = count % 2 == 1
    if not parity_ok:
        raise ResolutionError(f"even number of roots ({count}) found; near-tangent pair suspected")
    return RootSet(roots, brackets, parity_ok, float(scan_step), float(min_width), int(nsign))


@dataclass(frozen=True, eq=False)
class MleResult:
    estimate: float
    roots: RootSet
    losses: np.ndarray
    tie: bool
    method: str
    converged_steps: int | None = field(default=None)


def mle(s, method: str = "global", tie_tol: float = TIE_TOL, **scan) -> MleResult:
    """Maximum likelihood location estimate.

    ``global`` evaluates the loss at every root and returns the minimizer.
    Roots whose losses agree within ``tie_tol`` are ties, broken first by
    distance to the sample median and then in favour of the smaller root.
    ``local_from_median`` runs damped Newton from the median and returns
    whatever stationary point it reaches, which need not be the global one.
    """
    sample = as_sample(s)
    x = sample.values
    if method == "global":
        rs = find_roots(sample, **scan)
        pick, tie, losses = kernels.select_global(x, rs.roots, len(rs), float(tie_tol))
        return MleResult(float(rs.roots[pick]), rs, np.asarray(losses), bool(tie), method)
    if method in ("local", "local_from_median"):
        t, status, steps = kernels.local_mle(x, float(np.median(x)), LOCAL_MAX_STEPS)
        if status != 0:
            raise ConvergenceError(f"Newton from the median did not converge in {steps} steps")
        rs = RootSet(np.array([t]), np.array([[t, t]]), True, 0.0)
        return MleResult(float(t), rs, np.array([kernels.loss(x, t)]), False, "local_from_median", steps)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def _as_samples(samples) -> np.ndarray:
    arr = np.ascontiguousarray(samples, dtype=float)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D array with one sample per row")
    return arr


def mle_batch(samples, method: str = "global", scan_step: float = SCAN_STEP,
              max_halvings: int = MAX_HALVINGS, tie_tol: float = TIE_TOL):
    """Row-wise estimates for a 2-D array of samples.

    Returns ``(estimates, root_counts, status)``; failed rows carry NaN and a
    nonzero status instead of raising.  Local runs report root count 1.
    """
    arr = _as_samples(samples)
    reps = arr.shape[0]
    est = np.empty(reps)
    status = np.empty(reps, dtype=np.int64)
    if method == "global":
        nroots = np.empty(reps, dtype=np.int64)
        kernels.global_mle_batch(arr, float(scan_step), int(max_halvings), float(tie_tol), est, nroots, status)
    elif method in ("local", "local_from_median"):
        kernels.local_mle_batch(arr, LOCAL_MAX_STEPS, est, status)
        nroots = np.ones(reps, dtype=np.int64)
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return est, nroots, status
