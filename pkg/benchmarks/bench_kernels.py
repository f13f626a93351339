"""Compare the numba and pure-numpy kernels on the global MLE.

    python3 benchmarks/bench_kernels.py --reps 200 --n 10 100 1000

Each backend estimates the same seeded PVII samples; the script reports the
median time per sample and checks that the two backends agree.
"""

import argparse
import statistics
import time

import numpy as np

from pviiloc.kernels import _numba, _numpy
from pviiloc.likelihood import MAX_HALVINGS, SCAN_STEP, TIE_TOL
from pviiloc.pvii import make_rng, standard_draws


def _run(mod, block):
    k = block.shape[0]
    est = np.empty(k)
    nroots = np.empty(k, dtype=np.int64)
    status = np.empty(k, dtype=np.int64)
    mod.global_mle_batch(block, SCAN_STEP, MAX_HALVINGS, TIE_TOL, est, nroots, status)
    return est, nroots, status


def _time(mod, block, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = _run(mod, block)
        times.append(time.perf_counter() - start)
    return statistics.median(times) / block.shape[0], out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[10, 100, 1000])
    ap.add_argument("--m", type=float, default=1.0)
    ap.add_argument("--reps", type=int, default=200, help="samples per size")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)

    # compile once outside the timed region
    _run(_numba, np.stack([standard_draws(5, args.m, make_rng(0, i)) for i in range(2)]))

    print(f"{'n':>6} {'numba us':>10} {'numpy us':>10} {'speedup':>8} {'max |diff|':>11}")
    for n in args.n:
        block = np.stack([standard_draws(n, args.m, make_rng(args.seed, i)) for i in range(args.reps)])
        t_nb, (e_nb, r_nb, _) = _time(_numba, block, args.repeat)
        t_np, (e_np, r_np, _) = _time(_numpy, block, max(1, args.repeat // 3))
        if not np.array_equal(r_nb, r_np):
            raise SystemExit(f"root counts differ at n={n}")
        diff = float(np.max(np.abs(e_nb - e_np)))
        print(f"{n:>6} {t_nb * 1e6:>10.1f} {t_np * 1e6:>10.1f} {t_np / t_nb:>8.1f} {diff:>11.1e}")


if __name__ == "__main__":
    main()
