"""Seeded Monte Carlo runners for the asymptotic behaviour of the MLE.

Replicate ``i`` always draws from the generator keyed by ``(seed, i)``, and
replicates are processed in fixed-size chunks whose results land at their
own indices.  Reductions use :func:`math.fsum`, which is exactly rounded and
hence independent of order.  Together these make every runner's output a
function of ``(seed, config)`` alone, whatever the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .likelihood import MAX_HALVINGS, SCAN_STEP, TIE_TOL, mle, mle_batch
from .pvii import make_rng, standard_draws
from .theory import constants

__all__ = [
    "ExperimentConfig",
    "ExperimentError",
    "RootCensus",
    "VarianceRow",
    "lil_checkpoints",
    "run_clt",
    "run_deviation",
    "run_lil_trace",
    "run_root_census",
    "run_variance_table",
    "simulate_estimates",
]

CHUNK = 256
MAX_FAILURE_RATE = 1e-4
# unstable when more than this fraction of |theta_hat| exceed TAIL_IQR_MULT * IQR
TAIL_FRACTION_LIMIT = 1e-3
TAIL_IQR_MULT = 10.0
MIN_EXPECTED_HITS = 50
MIN_HITS = 10


class ExperimentError(ArithmeticError):
    """A Monte Carlo run could not produce a trustworthy result."""


@dataclass(frozen=True)
class ExperimentConfig:
    m: float
    n_values: tuple[int, ...]
    reps: int
    seed: int
    workers: int | None = None
    eps: tuple[float, ...] = (1.0,)
    lambda_exponent: float = 0.25
    method: str = "global"
    mu: float = 0.0
    scan_step: float = SCAN_STEP
    max_halvings: int = MAX_HALVINGS
    tie_tol: float = TIE_TOL

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in np.atleast_1d(self.n_values)))
        object.__setattr__(self, "eps", tuple(float(e) for e in np.atleast_1d(self.eps)))
        if not self.m > 0.5:
            raise ValueError(f"shape m must exceed 1/2, got {self.m}")
        if not self.n_values or min(self.n_values) < 1:
            raise ValueError("every sample size must be >= 1")
        if int(self.reps) < 1:
            raise ValueError("reps must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an integer in [0, 2**64)")

    def context(self) -> dict:
        """Everything needed to reproduce a run (the worker count is not)."""
        return {
            "m": self.m,
            "n_values": list(self.n_values),
            "reps": self.reps,
            "seed": self.seed,
            "method": self.method,
            "mu": self.mu,
            "eps": list(self.eps),
            "lambda_exponent": self.lambda_exponent,
            "scan_step": self.scan_step,
            "max_halvings": self.max_halvings,
            "tie_tol": self.tie_tol,
        }


@dataclass(frozen=True)
class VarianceRow:
    m: float
    n: int
    estimate: float
    mc_se: float
    reps_used: int
    unstable: bool
    tail_fraction: float = 0.0
    failures: int = 0


@dataclass(frozen=True)
class RootCensus:
    counts: dict[int, int]
    reps: int
    fitted_intensity: float
    c_m: float
    failures: int = 0
    n: int = 0

    def frequency(self, k: int) -> float:
        return self.counts.get(k, 0) / self.reps


@dataclass(frozen=True)
class Estimates:
    """Per-replicate output of :func:`simulate_estimates`."""

    theta: np.ndarray
    nroots: np.ndarray
    status: np.ndarray
    n: int
    failures: int = field(default=0)

    @property
    def ok(self) -> np.ndarray:
        return self.status == 0


def _workers(cfg: ExperimentConfig) -> int:
    return max(1, int(cfg.workers or os.cpu_count() or 1))


def _chunk(cfg: ExperimentConfig, n: int, start: int, stop: int):
    block = np.empty((stop - start, n))
    for j, i in enumerate(range(start, stop)):
        block[j] = cfg.mu + standard_draws(n, cfg.m, make_rng(cfg.seed, i))
    est, nroots, status = mle_batch(
        block, cfg.method, cfg.scan_step, cfg.max_halvings, cfg.tie_tol
    )
    return start, est - cfg.mu, nroots, status


def simulate_estimates(cfg: ExperimentConfig, n: int, reps: int | None = None) -> Estimates:
    """Centered estimates ``theta_hat - mu`` for ``reps`` replicates of size ``n``.

    Raises :class:`ExperimentError` when more than 0.01% of replicates fail.
    """
    reps = cfg.reps if reps is None else int(reps)
    theta = np.empty(reps)
    nroots = np.empty(reps, dtype=np.int64)
    status = np.empty(reps, dtype=np.int64)
    bounds = [(s, min(s + CHUNK, reps)) for s in range(0, reps, CHUNK)]
    workers = _workers(cfg)
    if workers == 1:
        results = (_chunk(cfg, n, a, b) for a, b in bounds)
    else:
        pool = ThreadPoolExecutor(workers)
        results = pool.map(lambda ab: _chunk(cfg, n, *ab), bounds)
    try:
        for start, est, nr, st in results:
            theta[start:start + est.size] = est
            nroots[start:start + est.size] = nr
            status[start:start + est.size] = st
    finally:
        if workers > 1:
            pool.shutdown()
    failures = int(np.count_nonzero(status))
    if failures > MAX_FAILURE_RATE * reps:
        raise ExperimentError(
            f"{failures} of {reps} replicates failed at n={n} (limit {MAX_FAILURE_RATE:.2%})"
        )
    return Estimates(theta, nroots, status, n, failures)


def _mean_var(v: np.ndarray) -> tuple[float, float]:
    mean = math.fsum(v) / v.size
    var = math.fsum((v - mean) ** 2) / (v.size - 1) if v.size > 1 else 0.0
    return mean, var


def tail_fraction(theta: np.ndarray) -> float:
    """Share of estimates beyond ``TAIL_IQR_MULT`` interquartile ranges."""
    q1, q3 = np.percentile(theta, [25, 75])
    iqr = q3 - q1
    if iqr <= 0:
        return 0.0
    return float(np.count_nonzero(np.abs(theta) > TAIL_IQR_MULT * iqr)) / theta.size


def run_variance_table(cfg: ExperimentConfig) -> list[VarianceRow]:
    """Monte Carlo ``n E[theta_hat^2]`` for each sample size in ``cfg``."""
    rows = []
    for n in cfg.n_values:
        sim = simulate_estimates(cfg, n)
        theta = sim.theta[sim.ok]
        v = n * theta**2
        mean, var = _mean_var(v)
        frac = tail_fraction(theta)
        rows.append(VarianceRow(
            m=cfg.m,
            n=n,
            estimate=mean,
            mc_se=math.sqrt(var / v.size),
            reps_used=int(v.size),
            unstable=frac > TAIL_FRACTION_LIMIT,
            tail_fraction=frac,
            failures=sim.failures,
        ))
    return rows


def _normal_cdf(z):
    return 0.5 * (1.0 + np.vectorize(math.erf)(z / math.sqrt(2.0)))


def ks_distance(values: np.ndarray, cdf) -> float:
    """Two-sided Kolmogorov-Smirnov distance between the sample and ``cdf``."""
    x = np.sort(values)
    f = cdf(x)
    k = x.size
    upper = np.arange(1, k + 1) / k - f
    lower = f - np.arange(0, k) / k
    return float(max(upper.max(), lower.max()))


def run_clt(cfg: ExperimentConfig) -> dict:
    """Spread of ``sqrt(n) theta_hat`` against its normal limit."""
    if len(cfg.n_values) != 1:
        raise ValueError("run_clt needs exactly one sample size")
    n = cfg.n_values[0]
    sim = simulate_estimates(cfg, n)
    z = math.sqrt(n) * sim.theta[sim.ok]
    mean, var = _mean_var(z)
    sd = math.sqrt(constants(cfg.m).asym_var)
    return {
        "m": cfg.m,
        "n": n,
        "reps": int(z.size),
        "mean_of_scaled": mean,
        "empirical_var_of_scaled": var,
        "theory_var": sd * sd,
        "ks_distance": ks_distance(z, lambda t: _normal_cdf(t / sd)),
        "failures": sim.failures,
    }


def run_root_census(cfg: ExperimentConfig) -> RootCensus:
    """Tally of root counts of the score equation at the first sample size.

    The intensity is fitted by maximum likelihood in the family
    ``P(2k+1 roots) = exp(-c) c^k / k!``, whose MLE is the mean of ``k``.
    """
    n = cfg.n_values[0]
    sim = simulate_estimates(cfg, n)
    counts_arr = sim.nroots[sim.ok]
    if np.any(counts_arr % 2 == 0):
        raise ExperimentError("even root count tallied")
    values, freq = np.unique(counts_arr, return_counts=True)
    counts = {int(v): int(f) for v, f in zip(values, freq)}
    k = (counts_arr - 1) // 2
    return RootCensus(
        counts=counts,
        reps=int(counts_arr.size),
        fitted_intensity=math.fsum(k) / k.size,
        c_m=constants(cfg.m).c_m,
        failures=sim.failures,
        n=n,
    )


def run_deviation(cfg: ExperimentConfig) -> list[dict]:
    """Moderate-deviation log-rates of ``P(|theta_hat| > eps / lambda_n)``.

    ``lambda_n = n ** lambda_exponent``; the empirical rate is
    ``log(P_hat) / (n / lambda_n^2)`` and its limit ``-bahadur_slope * eps^2``.
    """
    a = cfg.lambda_exponent
    if not 0.0 < a < 0.5:
        raise ValueError("lambda_exponent must lie in (0, 1/2)")
    slope = constants(cfg.m).bahadur_slope
    nmax = max(cfg.n_values)
    for eps in cfg.eps:
        expected = cfg.reps * math.exp(-slope * eps**2 * nmax ** (1.0 - 2.0 * a))
        if expected < MIN_EXPECTED_HITS:
            raise ValueError(
                f"reps={cfg.reps} gives ~{expected:.1f} expected hits at n={nmax}, eps={eps}; "
                f"need >= {MIN_EXPECTED_HITS}"
            )
    out = []
    for n in cfg.n_values:
        sim = simulate_estimates(cfg, n)
        theta = np.abs(sim.theta[sim.ok])
        lam = n**a
        speed = n / lam**2
        for eps in cfg.eps:
            hits = int(np.count_nonzero(theta > eps / lam))
            if hits < MIN_HITS:
                raise ExperimentError(f"only {hits} exceedances at n={n}, eps={eps}")
            p_hat = hits / theta.size
            out.append({
                "m": cfg.m,
                "n": n,
                "eps": eps,
                "lambda_n": lam,
                "hits": hits,
                "reps": int(theta.size),
                "p_hat": p_hat,
                "empirical_rate": math.log(p_hat) / speed,
                "theory_rate": -slope * eps**2,
            })
    return out


def lil_checkpoints(n_max: int, start: int = 100, ratio: float = 1.5) -> list[int]:
    """Geometric checkpoints ``ceil(start * ratio**j)`` not exceeding ``n_max``."""
    pts = []
    j = 0
    while True:
        n = math.ceil(start * ratio**j)
        if n > n_max:
            return pts
        if not pts or n > pts[-1]:
            pts.append(n)
        j += 1


def _trajectory(cfg: ExperimentConfig, checkpoints: list[int]):
    rng = make_rng(cfg.seed, 0)
    data = np.empty(0)
    for n in checkpoints:
        data = np.concatenate([data, cfg.mu + standard_draws(n - data.size, cfg.m, rng)])
        yield n, data


def run_lil_trace(cfg: ExperimentConfig, recompute: bool = False) -> dict:
    """Track ``s_n = sqrt(n / log log n) theta_hat`` along one growing sample.

    The sample grows in blocks between checkpoints from a single stream.
    ``recompute`` replays the stream from scratch at every checkpoint (slow)
    and is there to check the incremental path.
    """
    checkpoints = lil_checkpoints(max(cfg.n_values))
    if not checkpoints:
        raise ValueError("largest sample size must be at least 100")
    scan = {"scan_step": cfg.scan_step, "max_halvings": cfg.max_halvings} if cfg.method == "global" else {}
    s_values = []
    for j, (n, data) in enumerate(_trajectory(cfg, checkpoints)):
        if recompute:
            _, data = list(_trajectory(cfg, checkpoints[: j + 1]))[-1]
        theta = mle(data, method=cfg.method, tie_tol=cfg.tie_tol, **scan).estimate
        s_values.append(math.sqrt(n / math.log(math.log(n))) * (theta - cfg.mu))
    abs_s = np.abs(s_values)
    return {
        "m": cfg.m,
        "checkpoints": checkpoints,
        "s_values": s_values,
        "running_max": np.maximum.accumulate(abs_s).tolist(),
        "sup_statistic": float(abs_s.max()),
        "lil_const": constants(cfg.m).lil_const,
    }
