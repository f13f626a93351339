import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import polynomial_root_oracle
from pviiloc import likelihood as lk
from pviiloc.pvii import make_rng, standard_draws

SQRT3 = math.sqrt(3.0)
HARD = [-0.9035489700492767, 1.6736403041381884, -2.158121747462879,
        0.15589397780033867, 0.5901870793724837, -3.0264031228966264]

samples = st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=12)


def test_loss_examples():
    assert lk.loss(0.0, [0.0]) == 0.0
    assert lk.loss(0.0, [-1.0, 1.0]) == pytest.approx(math.log(2), abs=1e-15)
    assert lk.loss(SQRT3, [-2.0, 2.0]) == pytest.approx(math.log(4), abs=1e-14)


def test_score_and_derivative_examples():
    assert lk.score(0.0, [-1.0, 1.0]) == 0.0
    assert lk.score(1.0, [0.0]) == -0.5
    assert lk.score_slope(0.0, [0.0]) == -1.0
    assert lk.score_slope(1.0, [0.0]) == 0.0
    assert lk.score_curvature(0.0, [0.0]) == 0.0
    assert lk.score_curvature(0.0, [SQRT3]) == pytest.approx(0.0, abs=1e-15)


def test_evaluate_bundle():
    ev = lk.evaluate(0.5, [0.0, 3.0])
    assert ev.loss == lk.loss(0.5, [0.0, 3.0])
    assert ev.score == lk.score(0.5, [0.0, 3.0])
    assert ev.score_slope == lk.score_slope(0.5, [0.0, 3.0])


@settings(max_examples=200, deadline=None)
@given(samples, st.floats(-60, 60))
def test_pointwise_bounds(x, t):
    ev = lk.evaluate(t, x)
    assert abs(ev.score) <= 0.5 + 1e-15
    assert abs(ev.score_slope) <= 1.0 + 1e-15


@settings(max_examples=100, deadline=None)
@given(samples, st.floats(-60, 60))
def test_derivatives_consistent(x, t):
    h = 1e-5
    fd_loss = (lk.loss(t + h, x) - lk.loss(t - h, x)) / (2 * h)
    assert fd_loss == pytest.approx(-2 * lk.score(t, x), abs=1e-6)
    fd_score = (lk.score(t + h, x) - lk.score(t - h, x)) / (2 * h)
    assert fd_score == pytest.approx(lk.score_slope(t, x), abs=1e-6)
    fd_slope = (lk.score_slope(t + h, x) - lk.score_slope(t - h, x)) / (2 * h)
    assert fd_slope == pytest.approx(lk.score_curvature(t, x), abs=1e-5)


def test_root_examples():
    np.testing.assert_allclose(lk.find_roots([-1.0, 1.0]).roots, [0.0], atol=1e-12)
    np.testing.assert_allclose(lk.find_roots([-2.0, 2.0]).roots, [-SQRT3, 0.0, SQRT3], atol=1e-12)
    assert lk.find_roots([4.25]).roots.tolist() == [4.25]
    assert lk.find_roots([1.5, 1.5, 1.5]).roots.tolist() == [1.5]


def test_mle_examples():
    assert lk.mle([5.0]).estimate == 5.0
    assert lk.mle([-1.0, 1.0]).estimate == pytest.approx(0.0, abs=1e-12)
    r = lk.mle([-2.0, 2.0])
    assert r.estimate == pytest.approx(-SQRT3, abs=1e-12)
    assert r.tie
    np.testing.assert_allclose(r.losses, [math.log(4), math.log(5), math.log(4)], atol=1e-14)


def test_oracle_equivalence_random():
    rng = make_rng(314159)
    for i in range(200):
        n = 2 + i % 7
        x = standard_draws(n, 1.0, rng) * (1 + 3 * (i % 3))
        rs = lk.find_roots(x)
        ref = polynomial_root_oracle(x)
        assert len(rs) % 2 == 1
        assert len(rs) == ref.size, (x, rs.roots, ref)
        np.testing.assert_allclose(rs.roots, ref, atol=1e-7, rtol=0)
        res = lk.mle(x)
        assert res.estimate == rs.roots[np.argmin(res.losses)] or res.tie


def test_oracle_examples():
    np.testing.assert_allclose(polynomial_root_oracle([-2, 2]), [-SQRT3, 0, SQRT3], atol=1e-14)
    assert polynomial_root_oracle([0.0]).tolist() == [0.0]
    with pytest.raises(ValueError):
        polynomial_root_oracle(np.zeros(11) + np.arange(11))


@settings(max_examples=150, deadline=None)
@given(samples)
def test_rootset_invariants(x):
    rs = lk.find_roots(x)
    assert len(rs) % 2 == 1 and rs.parity_ok
    assert np.all(np.diff(rs.roots) > 0)
    assert rs.roots[0] >= min(x) and rs.roots[-1] <= max(x)
    for (a, b), r in zip(rs.brackets, rs.roots):
        assert a <= r <= b
        if a < b:
            fa, fb = lk.score(a, x), lk.score(b, x)
            assert fa * fb <= 0


@settings(max_examples=150, deadline=None)
@given(samples)
def test_mle_invariants(x):
    res = lk.mle(x)
    assert res.estimate in res.roots.roots
    assert res.losses.min() == pytest.approx(lk.loss(res.estimate, x), abs=1e-12)
    assert min(x) <= res.estimate <= max(x)


@settings(max_examples=150, deadline=None)
@given(samples, st.floats(-1e3, 1e3))
def test_translation_equivariance(x, c):
    x = np.array(x)
    a = lk.mle(x)
    assume(not a.tie)
    b = lk.mle(x + c)
    assume(not b.tie)
    assert b.estimate == pytest.approx(a.estimate + c, abs=1e-9 * (1 + abs(c)))


@settings(max_examples=150, deadline=None)
@given(samples)
def test_reflection_antisymmetry(x):
    x = np.array(x)
    a = lk.mle(x)
    assume(not a.tie)
    assert lk.mle(-x).estimate == pytest.approx(-a.estimate, abs=1e-10)


def test_local_versus_global():
    rng = make_rng(2718)
    agree = disagree = 0
    for _ in range(300):
        x = standard_draws(20, 1.0, rng)
        g = lk.mle(x)
        loc = lk.mle(x, method="local_from_median")
        assert loc.method == "local_from_median"
        assert abs(lk.score(loc.estimate, x)) < 1e-10
        if abs(loc.estimate - g.estimate) < 1e-9:
            agree += 1
        else:
            # a different stationary point; never a better one
            assert lk.loss(loc.estimate, x) >= lk.loss(g.estimate, x) - 1e-12
            disagree += 1
    assert agree > 250


def test_coarse_floor_falls_back_to_signs():
    fine = lk.find_roots(HARD)
    coarse = lk.find_roots(HARD, scan_step=0.5, max_halvings=0)
    assert fine.sign_only == 0
    assert coarse.sign_only > 0
    assert len(coarse) % 2 == 1


def test_triple_root_is_sign_only():
    rs = lk.find_roots([-1.0, 1.0])
    assert len(rs) == 1 and rs.sign_only > 0


def test_even_parity_raises(monkeypatch):
    real = lk.kernels.find_roots

    def drop_last(x, step, halvings):
        roots, brackets, count, status, width, nsign = real(x, step, halvings)
        return roots[:-1], brackets[:-1], count - 1, status, width, nsign

    monkeypatch.setattr(lk.kernels, "find_roots", drop_last)
    with pytest.raises(lk.ResolutionError, match="even number"):
        lk.find_roots([-2.0, 2.0])


def test_far_outlier_float_limited():
    # an outlier so large that neighbouring doubles straddle its root
    x = [0.1, -0.2, 0.05, 3e17]
    rs = lk.find_roots(x)
    assert len(rs) % 2 == 1
    assert lk.mle(x).estimate == pytest.approx(lk.mle(x[:3]).estimate, abs=0.1)


def test_unknown_method():
    with pytest.raises(ValueError):
        lk.mle([1.0, 2.0], method="newton")
    with pytest.raises(ValueError):
        lk.mle_batch(np.zeros((2, 3)), method="newton")


def test_batch_matches_single():
    rng = make_rng(8)
    block = np.stack([standard_draws(15, 0.8, rng) for _ in range(50)])
    est, nroots, status = lk.mle_batch(block)
    assert np.all(status == 0)
    for row, e, k in zip(block, est, nroots):
        r = lk.mle(row)
        assert e == r.estimate and k == len(r.roots)
    est_l, nr_l, st_l = lk.mle_batch(block, method="local")
    assert np.all(nr_l == 1) and np.all(st_l == 0)
    for row, e in zip(block, est_l):
        assert e == lk.mle(row, method="local").estimate
    with pytest.raises(ValueError):
        lk.mle_batch(block[0])
