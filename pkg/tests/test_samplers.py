import math

import numpy as np
import pytest
from scipy import integrate, stats

from pdpreg.rng import RandomSource
from pdpreg.samplers import (sample_categorical, sample_truncated_gamma,
                             sample_truncated_normal)


def test_random_source_reproducible():
    a = RandomSource(1234, 7).generator().random(100)
    b = RandomSource(1234, 7).generator().random(100)
    np.testing.assert_array_equal(a, b)


def test_random_source_streams_uncorrelated():
    n = 20000
    x = RandomSource(5, 0).generator().random(n)
    y = RandomSource(5, 1).generator().random(n)
    assert not np.array_equal(x, y)
    corr = np.corrcoef(x, y)[0, 1]
    assert abs(corr) < 4.0 / math.sqrt(n)


def test_truncated_normal_unconstrained_matches_normal():
    rng = RandomSource(0).generator()
    draws = sample_truncated_normal(np.zeros(50000), 1.0, -np.inf, np.inf, rng)
    assert abs(draws.mean()) < 4 * draws.std() / math.sqrt(draws.size)
    assert abs(draws.std() - 1.0) < 0.02


def test_truncated_normal_support():
    rng = RandomSource(1).generator()
    for _ in range(200):
        x = sample_truncated_normal(0.0, 1.0, 5.0, np.inf, rng)
        assert x > 5.0
    draws = sample_truncated_normal(np.zeros(1000), 1.0, -1.0, 1.0, rng)
    assert np.all((draws > -1.0) & (draws < 1.0))


def test_truncated_normal_symmetric_mean():
    # (0, 1, -1, 1) is symmetric, so the mean is exactly 0.
    rng = RandomSource(2).generator()
    draws = sample_truncated_normal(np.zeros(100000), 1.0, -1.0, 1.0, rng)
    se = draws.std() / math.sqrt(draws.size)
    assert abs(draws.mean()) < 3 * se


@pytest.mark.parametrize("mean,sd,lo,hi", [
    (0.0, 1.0, -1.0, 1.0),
    (2.0, 0.5, 1.0, np.inf),
    (0.0, 1.0, 4.5, np.inf),      # one-sided tail rejection path
    (0.0, 1.0, -np.inf, -5.0),    # mirrored tail
    (0.0, 1.0, 4.2, 4.6),         # narrow far-tail window
    (-3.0, 2.0, -1.0, 7.5),
])
def test_truncated_normal_moments(mean, sd, lo, hi):
    rng = RandomSource(3).generator()
    n = 100000
    draws = sample_truncated_normal(np.full(n, mean), sd, lo, hi, rng)
    a = (lo - mean) / sd
    b = (hi - mean) / sd
    ref = stats.truncnorm(a, b, loc=mean, scale=sd)
    se_mean = draws.std() / math.sqrt(n)
    assert abs(draws.mean() - ref.mean()) < 3 * se_mean
    # SE of the sample variance via the fourth central moment.
    m4 = np.mean((draws - draws.mean()) ** 4)
    se_var = math.sqrt(max(m4 - draws.var() ** 2, 0.0) / n)
    assert abs(draws.var() - ref.var()) < 3 * se_var + 1e-12


def test_truncated_normal_invalid_interval():
    rng = RandomSource(4).generator()
    with pytest.raises(ValueError):
        sample_truncated_normal(0.0, 1.0, 1.0, 1.0, rng)
    with pytest.raises(ValueError):
        sample_truncated_normal(0.0, 1.0, 2.0, -2.0, rng)
    with pytest.raises(ValueError):
        sample_truncated_normal(0.0, 0.0, -1.0, 1.0, rng)


def test_categorical_point_mass():
    rng = RandomSource(5).generator()
    for _ in range(50):
        assert sample_categorical(np.array([0.0, -np.inf]), rng) == 0


def test_categorical_frequencies():
    # Normalized weights (1.5, 0.5, 2.0)/4 = (0.375, 0.125, 0.5).
    rng = RandomSource(6).generator()
    lw = np.log(np.array([1.5, 0.5, 2.0]))
    n = 100000
    counts = np.bincount([sample_categorical(lw, rng) for _ in range(n)],
                         minlength=3)
    for freq, p in zip(counts / n, (0.375, 0.125, 0.5)):
        se = math.sqrt(p * (1 - p) / n)
        assert abs(freq - p) < 3 * se


def test_categorical_shift_invariance():
    lw = np.log(np.array([1.5, 0.5, 2.0]))
    a = [sample_categorical(lw, RandomSource(7).generator()) for _ in range(1)]
    rng1 = RandomSource(7).generator()
    rng2 = RandomSource(7).generator()
    seq1 = [sample_categorical(lw, rng1) for _ in range(500)]
    seq2 = [sample_categorical(lw + 123.4, rng2) for _ in range(500)]
    assert seq1 == seq2
    assert a[0] == seq1[0]


def test_categorical_degenerate():
    rng = RandomSource(8).generator()
    with pytest.raises(ValueError):
        sample_categorical(np.array([-np.inf, -np.inf]), rng)


def test_truncated_gamma_moments():
    shape, rate, lo, hi = 3.0, 2.0, 0.5, 2.0
    rng = RandomSource(9).generator()
    n = 100000
    draws = np.array([sample_truncated_gamma(shape, rate, lo, hi, rng)
                      for _ in range(n)])
    assert np.all((draws > lo) & (draws < hi))
    dens = stats.gamma(shape, scale=1.0 / rate).pdf
    z, _ = integrate.quad(dens, lo, hi)
    m1, _ = integrate.quad(lambda x: x * dens(x), lo, hi)
    se = draws.std() / math.sqrt(n)
    assert abs(draws.mean() - m1 / z) < 3 * se


def test_truncated_gamma_open_upper():
    rng = RandomSource(10).generator()
    draws = np.array([sample_truncated_gamma(2.0, 1.0, 3.0, np.inf, rng)
                      for _ in range(2000)])
    assert np.all(draws > 3.0)


def test_truncated_gamma_degenerate_interval():
    # Interval far beyond all prior mass: collapse toward the nearer bound.
    rng = RandomSource(11).generator()
    x = sample_truncated_gamma(2.0, 1.0, 400.0, 401.0, rng)
    assert 400.0 < x < 401.0
