import numpy as np
import pytest

from core.blocking import blocking_error
from utils.exceptions import AccuracyError

pytestmark = pytest.mark.unit


def ar1(n, phi, seed):
    rng = np.random.default_rng(seed)
    noise = rng.normal(size=n)
    x = np.empty(n)
    x[0] = noise[0] / np.sqrt(1 - phi ** 2)
    for t in range(1, n):
        x[t] = phi * x[t - 1] + noise[t]
    return x


def test_independent_samples_give_naive_error():
    x = np.random.default_rng(1).normal(0.0, 2.0, 2 ** 14)
    result = blocking_error(x, minimum=64)
    assert result.n_used == 2 ** 14
    assert result.std_error == pytest.approx(2.0 / np.sqrt(2 ** 14), rel=0.2)
    assert result.mean == pytest.approx(np.mean(x))


def test_correlated_samples_inflate_the_error():
    x = ar1(2 ** 16, 0.9, seed=3)
    result = blocking_error(x, minimum=64)
    naive = np.std(x) / np.sqrt(len(x))
    assert result.std_error > 2.0 * naive
    assert result.level > 0


def test_constant_series_has_zero_error():
    result = blocking_error(np.full(256, 3.5), minimum=64)
    assert result.std_error == 0.0
    assert result.mean == 3.5


def test_short_series_rejected():
    with pytest.raises(AccuracyError) as excinfo:
        blocking_error(np.ones(10), minimum=64)
    assert excinfo.value.required == 64


def test_series_is_cut_to_power_of_two():
    x = np.random.default_rng(2).normal(size=1000)
    assert blocking_error(x, minimum=64).n_used == 512


def test_error_shrinks_like_inverse_square_root():
    rng = np.random.default_rng(5)
    short = blocking_error(rng.normal(size=2 ** 14), minimum=64).std_error
    long = blocking_error(rng.normal(size=2 ** 16), minimum=64).std_error
    assert short / long == pytest.approx(2.0, rel=0.25)
