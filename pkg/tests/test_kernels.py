"""The compiled and pure-numpy backends must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from pviiloc import kernels
from pviiloc.kernels import _numba, _numpy
from pviiloc.pvii import make_rng, standard_draws

CASES = [(m, n) for m in (0.6, 1.0, 1.5) for n in (1, 2, 5, 10, 50, 300)]


def _samples(m, n, count, seed):
    rng = make_rng(seed)
    return [standard_draws(n, m, rng) for _ in range(count)]


def test_default_backend_is_numba():
    assert kernels.BACKEND == "numba"


@pytest.mark.parametrize("m,n", CASES)
def test_root_enumeration_agrees(m, n):
    for x in _samples(m, n, 30 if n < 300 else 6, seed=int(100 * m) + n):
        a = _numba.find_roots(x, 0.05, 8)
        b = _numpy.find_roots(x, 0.05, 8)
        assert a[2] == b[2] and a[3] == b[3]
        np.testing.assert_allclose(a[0], b[0], rtol=1e-12, atol=1e-12)
        pa = _numba.select_global(x, a[0], a[2], 1e-10)
        pb = _numpy.select_global(x, b[0], b[2], 1e-10)
        assert pa[0] == pb[0] and pa[1] == pb[1]


@pytest.mark.parametrize("fn", ["loss", "score", "score_slope", "score_curvature"])
def test_pointwise_agree(fn):
    x = standard_draws(40, 0.8, make_rng(3))
    for t in np.linspace(-30, 30, 61):
        assert getattr(_numba, fn)(x, t) == pytest.approx(getattr(_numpy, fn)(x, t), rel=1e-13, abs=1e-15)


def test_large_arguments_stay_finite():
    x = np.array([1e200, -1e200, 0.0])
    for mod in (_numba, _numpy):
        assert np.isfinite(mod.loss(x, 0.0))


def test_local_agrees():
    for x in _samples(1.0, 25, 40, seed=9):
        a = _numba.local_mle(x, float(np.median(x)), 100)
        b = _numpy.local_mle(x, float(np.median(x)), 100)
        assert a[1] == b[1] == 0
        assert a[0] == pytest.approx(b[0], rel=1e-12, abs=1e-12)


def test_batch_agrees():
    block = np.stack(_samples(0.7, 12, 64, seed=4))
    outs = []
    for mod in (_numba, _numpy):
        est = np.empty(64)
        nr = np.empty(64, dtype=np.int64)
        st = np.empty(64, dtype=np.int64)
        mod.global_mle_batch(block, 0.05, 8, 1e-10, est, nr, st)
        outs.append((est, nr, st))
    np.testing.assert_allclose(outs[0][0], outs[1][0], rtol=1e-12, atol=1e-12)
    assert np.array_equal(outs[0][1], outs[1][1])
    assert np.array_equal(outs[0][2], outs[1][2])


@pytest.mark.parametrize("value,expected", [("1", "numpy"), ("0", "numba"), ("", "numba")])
def test_env_flag_selects_backend(value, expected):
    env = dict(os.environ, PVIILOC_PURE_NUMPY=value)
    code = "from pviiloc import kernels, mle; print(kernels.BACKEND, mle([-2.0, 2.0]).estimate)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, est = out.stdout.split()
    assert backend == expected
    assert float(est) == pytest.approx(-3**0.5, abs=1e-12)
