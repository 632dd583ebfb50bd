"""The compiled kernels and the numpy fallback must agree."""

import numpy as np
import pytest

from repunet_sim import _kernels_py, kernels

compiled = pytest.importorskip("repunet_sim._kernels")


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("dim", [1, 2, 17, 1000])
def test_similarity_stats_agree(dim):
    rng = np.random.default_rng(dim)
    for _ in range(50):
        a = rng.normal(size=dim) * rng.uniform(0.01, 100)
        b = rng.normal(size=dim) * rng.uniform(0.01, 100)
        np.testing.assert_allclose(compiled.similarity_stats(a, b), _kernels_py.similarity_stats(a, b),
                                   rtol=1e-9, atol=1e-12)


def test_fraction_above_agrees():
    rng = np.random.default_rng(0)
    for _ in range(200):
        v = rng.normal(size=int(rng.integers(1, 300)))
        t = float(rng.uniform(0, 2))
        assert compiled.fraction_above(v, t) == _kernels_py.fraction_above(v, t)


@pytest.mark.parametrize("batch", [1, 7, 32, 500])
def test_sgd_epoch_agrees(batch):
    rng = np.random.default_rng(batch)
    X = rng.normal(size=(123, 6))
    y = rng.integers(0, 4, 123).astype(np.int64)
    W0 = rng.normal(size=(4, 7)) * 0.1
    Wc, Wp = W0.copy(), W0.copy()
    compiled.sgd_epoch(Wc, X, y, 0.1, batch)
    _kernels_py.sgd_epoch(Wp, X, y, 0.1, batch)
    np.testing.assert_allclose(Wc, Wp, rtol=1e-9, atol=1e-12)
