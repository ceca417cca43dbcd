import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pbiharm.numerics import (BracketError, QuadratureError, find_root, gamma, integrate,
                              lgamma, max_on_interval)


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (5.0, 24.0), (0.5, math.sqrt(math.pi)),
                                         (1.5, 0.5 * math.sqrt(math.pi))])
def test_gamma_values(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, -2.5])
def test_gamma_rejects_nonpositive(x):
    with pytest.raises(ValueError):
        gamma(x)
    with pytest.raises(ValueError):
        lgamma(x)


@given(st.floats(0.1, 50.0))
def test_lgamma_matches_log_gamma(x):
    assert lgamma(x) == pytest.approx(math.log(gamma(x)), rel=1e-12, abs=1e-13)


def test_integrate_polynomial_exact():
    res = integrate(lambda s: 3 * s * s, 0.0, 2.0)
    assert res.value == pytest.approx(8.0, rel=1e-14)
    assert res.error_estimate <= 1e-10


def test_integrate_kink_split():
    res = integrate(lambda s: abs(s - 0.3) ** 1.5, 0.0, 1.0, kinks=[0.3])
    exact = (0.3 ** 2.5 + 0.7 ** 2.5) / 2.5
    assert res.value == pytest.approx(exact, rel=1e-12)
    assert res.subdivisions >= 2


def test_integrate_reports_failure():
    with pytest.raises(QuadratureError):
        integrate(lambda s: 1.0 / s, 1e-300, 1.0, tol=1e-14, rtol=1e-14, limit=5)


def test_find_root_and_bracket_error():
    assert find_root(lambda s: s * s - 2, 0.0, 2.0) == pytest.approx(math.sqrt(2), rel=1e-14)
    with pytest.raises(BracketError):
        find_root(lambda s: s * s + 1, -1.0, 1.0)


@settings(max_examples=30)
@given(st.floats(-3.0, 3.0))
def test_max_on_interval_parabola(c):
    x, v = max_on_interval(lambda s: -(s - c) ** 2, -4.0, 4.0)
    assert x == pytest.approx(c, abs=1e-6)
    assert v == pytest.approx(0.0, abs=1e-12)


def test_max_on_interval_endpoint():
    x, v = max_on_interval(np.exp, 0.0, 1.0)
    assert x == pytest.approx(1.0)
    assert v == pytest.approx(math.e)
