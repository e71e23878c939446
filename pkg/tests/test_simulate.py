import numpy as np
import pytest
from hypothesis import given, strategies as st

from krr import GeneratorParams, generate, icc_k, spearman_brown, true_icc
from krr.errors import DegenerateData


def test_noiseless_raters():
    t = generate(GeneratorParams(sigma2_eps=0.0, n=30, k=4, seed=1))
    assert np.all(t.values == t.values[:, :1])
    assert icc_k(t, 1).value == 1.0


def test_no_item_signal():
    t = generate(GeneratorParams(sigma2_phi=0.0, sigma2_eps=1.0, n=10000, k=5, seed=2))
    assert abs(icc_k(t, 1).value) < 0.03


def test_equal_components_recovered():
    # truth 1 / (1 + 1); Monte Carlo sd of the estimate is about 0.003 here
    t = generate(GeneratorParams(sigma2_phi=1.0, sigma2_eps=1.0, n=10000, k=13, seed=3))
    assert icc_k(t, 1).value == pytest.approx(0.5, abs=0.02)


@pytest.mark.parametrize("k,expected", [(1, 0.5), (13, 13 / 14)])
def test_true_icc(k, expected):
    assert true_icc(GeneratorParams(sigma2_phi=1.0, sigma2_eps=1.0), k) == pytest.approx(expected)


def test_true_icc_without_signal():
    assert true_icc(GeneratorParams(sigma2_phi=0.0, sigma2_eps=2.0), 7) == 0.0
    with pytest.raises(DegenerateData):
        true_icc(GeneratorParams(sigma2_phi=0.0, sigma2_eps=0.0), 1)


def test_generate_is_deterministic_and_complete():
    p = GeneratorParams(mu=5, n=20, k=3, seed=9)
    a, b = generate(p), generate(p)
    assert a == b
    assert a.is_complete and a.shape == (20, 3)
    assert generate(GeneratorParams(mu=5, n=20, k=3, seed=10)) != a


def test_clip_and_round():
    p = GeneratorParams(mu=5.5, sigma2_phi=4, sigma2_eps=4, n=200, k=13, seed=0,
                        value_clip=(1, 10), round_step=1)
    v = generate(p).values
    assert v.min() >= 1 and v.max() <= 10
    assert np.all(v == np.round(v))


@pytest.mark.parametrize("kwargs", [
    dict(sigma2_phi=-1), dict(sigma2_eps=-0.1), dict(n=1), dict(k=0),
    dict(value_clip=(5, 1)), dict(round_step=0),
])
def test_invalid_params(kwargs):
    with pytest.raises(ValueError):
        GeneratorParams(**kwargs)


@given(st.floats(1e-3, 100), st.floats(0, 100), st.integers(1, 1000))
def test_true_icc_obeys_spearman_brown(phi, eps, k):
    p = GeneratorParams(sigma2_phi=phi, sigma2_eps=eps)
    assert spearman_brown(true_icc(p, 1), k) == pytest.approx(true_icc(p, k), rel=1e-12)
