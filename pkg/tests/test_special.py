import math

import numpy as np
import pytest
from scipy import integrate, special

from wagegap.errors import DomainError
from wagegap.special import student_t_cdf, student_t_sf

T_GRID = np.linspace(0.0, 10.0, 21)
DFS = (1, 2, 5, 30, 120)


def quad_two_sided(t: float, df: float) -> float:
    """Two-sided tail by adaptive integration of the t density."""
    log_c = special.gammaln((df + 1) / 2) - special.gammaln(df / 2) - 0.5 * math.log(df * math.pi)

    def density(u):
        return math.exp(log_c - (df + 1) / 2 * math.log1p(u * u / df))

    body, _ = integrate.quad(density, 0.0, t, epsabs=1e-14, epsrel=1e-13, limit=200)
    return max(0.0, 1.0 - 2.0 * body)


@pytest.mark.parametrize("df", DFS)
def test_matches_numeric_integration(df):
    for t in T_GRID:
        assert abs(student_t_sf(t, df) - quad_two_sided(t, df)) <= 1e-8


@pytest.mark.parametrize("df", DFS + (7.5, 1e4))
def test_matches_scipy(df):
    for t in np.linspace(-8, 8, 33):
        assert student_t_sf(t, df) == pytest.approx(2 * special.stdtr(df, -abs(t)), abs=1e-10)


def test_examples():
    assert student_t_sf(0.0, 3) == 1.0
    assert student_t_sf(1.0, 1) == pytest.approx(0.5, abs=1e-14)
    assert student_t_sf(1.96, 1e6) == pytest.approx(0.05, abs=1e-3)


def test_cauchy_closed_form():
    for t in (0.3, 2.0, 15.0):
        assert student_t_cdf(t, 1) == pytest.approx(0.5 + math.atan(t) / math.pi, abs=1e-12)


def test_limits_and_errors():
    assert student_t_sf(math.inf, 4) == 0.0
    with pytest.raises(DomainError):
        student_t_sf(1.0, 0)
    with pytest.raises(DomainError):
        student_t_sf(1.0, -2)
