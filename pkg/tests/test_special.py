import math

import numpy as np
import pytest
import scipy.special

from pdpreg.special import digamma, trigamma

EULER = 0.5772156649015329


def test_digamma_known_values():
    assert digamma(1.0) == pytest.approx(-EULER, abs=1e-10)
    assert digamma(2.0) == pytest.approx(1.0 - EULER, abs=1e-10)
    assert digamma(0.5) == pytest.approx(-EULER - 2.0 * math.log(2.0), abs=1e-10)


def test_trigamma_known_values():
    assert trigamma(1.0) == pytest.approx(math.pi ** 2 / 6.0, abs=1e-10)
    assert trigamma(2.0) == pytest.approx(math.pi ** 2 / 6.0 - 1.0, abs=1e-10)
    assert trigamma(0.5) == pytest.approx(math.pi ** 2 / 2.0, abs=1e-10)


def test_recurrences_on_grid():
    x = np.concatenate([np.arange(0.1, 1.0, 0.1), np.arange(1.0, 100.5, 0.5)])
    np.testing.assert_allclose(digamma(x + 1.0) - digamma(x), 1.0 / x, atol=1e-10)
    np.testing.assert_allclose(trigamma(x + 1.0) - trigamma(x), -1.0 / x ** 2,
                               atol=1e-10)


def test_matches_reference_library():
    x = np.logspace(-3, 6, 400)
    np.testing.assert_allclose(digamma(x), scipy.special.digamma(x), atol=1e-10)
    np.testing.assert_allclose(trigamma(x), scipy.special.polygamma(1, x),
                               atol=1e-10)


@pytest.mark.parametrize("bad", [0.0, -1.0, -0.5, np.nan])
def test_domain_errors(bad):
    with pytest.raises(ValueError):
        digamma(bad)
    with pytest.raises(ValueError):
        trigamma(bad)


def test_array_and_scalar_agree():
    xs = [0.001, 0.3, 1.7, 42.0, 1e6]
    arr = digamma(np.array(xs))
    for x, v in zip(xs, arr):
        assert digamma(x) == v
    assert isinstance(digamma(2.5), float)
