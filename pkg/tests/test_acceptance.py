"""Acceptance suite: one PASS/FAIL line per criterion at pinned tolerances.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
written straight to the terminal.  Seeds are fixed once and never tuned.
"""

import io
import json
import math
from contextlib import redirect_stdout

import numpy as np
import pytest

from oracles import REF_LIMIT, REF_M1, REF_M15_N500, polynomial_root_oracle
from pviiloc import cli, likelihood, theory
from pviiloc import experiments as ex
from pviiloc.pvii import make_rng, standard_draws

SEEDS = {3: 20260103, 5: 20260105, 6: 20260106, 7: 20260107, 9: 20260109}
SHAPES = [round(0.6 + 0.1 * i, 1) for i in range(10)]


@pytest.fixture
def report(capsys):
    def _report(cid, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {cid}: {detail}")
        assert ok, detail
    return _report


def _cli_json(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli.main([*argv, "--format", "json"])
    assert code == 0
    return [json.loads(line) for line in buf.getvalue().splitlines()]


def test_c1_closed_form_constants(report):
    argv = ["theory"] + [a for m in SHAPES for a in ("--m", str(m))]
    recs = {r["params"]["m"]: r["results"]["asym_var"] for r in _cli_json(argv)}
    worst = max(abs(recs[m] - REF_LIMIT[m]) for m in SHAPES)
    report(1, worst <= 5e-4,
           f"asym_var over m=0.6..1.5 vs reference limits, max |diff| {worst:.2e} <= 5e-4 "
           f"(m=0.6: {recs[0.6]:.3f}, m=1: {recs[1.0]:.3f}, m=1.5: {recs[1.5]:.3f})")


def test_c2_quadrature_vs_closed_form(report):
    worst_i = worst_d = 0.0
    for m in SHAPES:
        sq = theory.expect(lambda x: (x / (1 + x * x)) ** 2, m).value
        worst_i = max(worst_i, abs(4 * m * m * sq - m * (2 * m - 1) / (m + 1)))
        mean_slope = theory.expect(lambda x: (x * x - 1) / (1 + x * x) ** 2, m).value
        worst_d = max(worst_d, abs(mean_slope + (2 * m - 1) / (2 * (m + 1))))
    report(2, worst_i <= 1e-8 and worst_d <= 1e-8,
           f"4m^2 E[D^2] vs I(m): {worst_i:.1e}; E[dD/dt] vs closed form: {worst_d:.1e} (<= 1e-8)")


def test_c3_oracle_equivalence(report):
    rng = make_rng(SEEDS[3])
    worst = 0.0
    bad = []
    for i in range(200):
        n = 2 + i % 7
        x = standard_draws(n, 1.0, rng)
        rs = likelihood.find_roots(x)
        ref = polynomial_root_oracle(x)
        res = likelihood.mle(x)
        ok = len(rs) % 2 == 1 and len(rs) == ref.size
        if ok:
            worst = max(worst, float(np.max(np.abs(rs.roots - ref))))
            best = np.flatnonzero(res.losses <= res.losses.min() + likelihood.TIE_TOL)
            ok = res.estimate in rs.roots[best] and res.losses.min() == min(
                likelihood.loss(r, x) for r in rs.roots)
        if not ok:
            bad.append(i)
    report(3, not bad and worst <= 1e-7,
           f"200 samples n=2..8: max |root - oracle| {worst:.1e} <= 1e-7, odd counts, "
           f"estimate = argmin loss; mismatches {len(bad)}")


def test_c4_hand_cases(report):
    s3 = math.sqrt(3)
    single = likelihood.mle([2.5]).estimate
    pair = likelihood.mle([-1.0, 1.0]).estimate
    quartic = likelihood.mle([-2.0, 2.0])
    ok = (single == 2.5 and abs(pair) < 1e-12 and abs(quartic.estimate + s3) < 1e-12 and quartic.tie
          and np.allclose(quartic.roots.roots, [-s3, 0, s3], atol=1e-12))
    report(4, ok, f"{{2.5}} -> {single}, {{-1,1}} -> {pair:.1e}, {{-2,2}} -> {quartic.estimate:.10f} "
                  f"tie={quartic.tie}")


def test_c5_variance_table(report):
    reps = 10**5
    seed = SEEDS[5]
    parts = []
    ok = True
    rows = ex.run_variance_table(ex.ExperimentConfig(m=1.0, n_values=(10, 100, 1000), reps=reps, seed=seed))
    for row in rows:
        ref = REF_M1[row.n]
        d = abs(row.estimate - ref)
        good = d <= 3 * row.mc_se and d <= 0.02 * ref
        ok &= good
        parts.append(f"m=1 n={row.n}: {row.estimate:.4f}+-{row.mc_se:.4f} vs {ref} {'ok' if good else 'X'}")
    row = ex.run_variance_table(ex.ExperimentConfig(m=1.5, n_values=(500,), reps=reps, seed=seed))[0]
    good = abs(row.estimate - REF_M15_N500) <= 0.02 * REF_M15_N500
    ok &= good
    parts.append(f"m=1.5 n=500: {row.estimate:.4f} vs {REF_M15_N500} {'ok' if good else 'X'}")
    row = ex.run_variance_table(ex.ExperimentConfig(m=0.6, n_values=(10,), reps=reps, seed=seed))[0]
    ok &= row.unstable
    parts.append(f"m=0.6 n=10 unstable={row.unstable} (tail {row.tail_fraction:.1e})")
    report(5, ok, "; ".join(parts))


def test_c6_clt(report):
    out = ex.run_clt(ex.ExperimentConfig(m=1.0, n_values=(1000,), reps=10**4, seed=SEEDS[6]))
    v, ks = out["empirical_var_of_scaled"], out["ks_distance"]
    report(6, 1.85 <= v <= 2.15 and ks < 0.02,
           f"m=1 n=1000: var(sqrt(n) theta) {v:.4f} in [1.85, 2.15], KS to N(0,2) {ks:.4f} < 0.02")


def test_c7_root_census(report):
    c = ex.run_root_census(ex.ExperimentConfig(m=1.0, n_values=(1000,), reps=10**4, seed=SEEDS[7]))
    p1, p3 = c.frequency(1), c.frequency(3)
    t1 = math.exp(-1 / math.pi)
    t3 = t1 / math.pi
    report(7, abs(p1 - t1) <= 0.02 and abs(p3 - t3) <= 0.02,
           f"m=1 n=1000: P(1 root) {p1:.4f} vs {t1:.4f}, P(3 roots) {p3:.4f} vs {t3:.4f} (+-0.02); "
           f"fitted intensity {c.fitted_intensity:.4f}, c_m {c.c_m:.4f}")


def test_c8_moderate_deviation(report, deviation_rows):
    r100, r400 = deviation_rows[100], deviation_rows[400]
    theo = r400["theory_rate"]
    e100, e400 = r100["empirical_rate"], r400["empirical_rate"]
    negative = e100 < 0 and e400 < 0
    approaching = abs(e400 - theo) < abs(e100 - theo)
    factor = e400 / theo
    report(8, negative and approaching and 0.5 <= factor <= 2.0,
           f"rates n=100 {e100:.4f}, n=400 {e400:.4f}, limit {theo}: negative={negative}, "
           f"gap shrinking={approaching}, ratio at n=400 {factor:.3f} in [0.5, 2]")


def test_c9_determinism_across_workers(report, tmp_path):
    # the criteria 5-8 commands at reduced replicate counts
    seed = str(SEEDS[9])
    commands = {
        "variance": ["--m", "1", "--m", "1.5", "--m", "0.6", "--n", "10", "--n", "100", "--reps", "3000"],
        "clt": ["--m", "1", "--n", "1000", "--reps", "1000"],
        "roots": ["--m", "1", "--n", "1000", "--reps", "1000"],
        "deviation": ["--m", "1", "--n", "100", "--n", "400", "--reps", "20000"],
        "lil": ["--m", "1", "--n", "20000", "--reps", "1"],
    }
    same = {}
    for kind, extra in commands.items():
        blobs = []
        for workers in ("1", "4"):
            path = tmp_path / f"{kind}-{workers}.csv"
            assert cli.main(["simulate", kind, *extra, "--seed", seed, "--workers", workers,
                             "--out", str(path)]) == 0
            blobs.append(path.read_bytes())
        same[kind] = blobs[0] == blobs[1]
    report(9, all(same.values()),
           "byte-identical outputs for --workers 1 vs 4: " + ", ".join(f"{k}={v}" for k, v in same.items()))
