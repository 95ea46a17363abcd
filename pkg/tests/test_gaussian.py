"""Tail numerics against quadrature and the closed-form sandwich."""

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bufpart import gaussian_tail, gaussian_tail_inv, tail_sandwich
from bufpart.gaussian import log_gaussian_tail


def quadrature_tail(t: float) -> float:
    """Independent oracle: adaptive quadrature of the standard normal density."""
    density = lambda x: mpmath.exp(-x * x / 2) / mpmath.sqrt(2 * mpmath.pi)
    return float(mpmath.quad(density, [t, t + 60, mpmath.inf]))


def test_tail_at_zero_is_exactly_half():
    assert gaussian_tail(0.0) == 0.5


def test_tail_against_quadrature():
    for t in (-2.0, -0.5, 0.3, 1.0, 1.6449, 2.0, 3.7, 5.0, 8.0):
        assert gaussian_tail(t) == pytest.approx(quadrature_tail(t), abs=1e-14)


def test_tail_at_quantile():
    # Phi_bar(1.6449) ~ 0.05, expected value computed by the quadrature oracle
    assert gaussian_tail(1.6449) == pytest.approx(0.05, abs=1e-4)


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0])
def test_tail_sandwich(t):
    lo, hi = tail_sandwich(t)
    val = gaussian_tail(t)
    assert lo < val < hi


def test_inverse_round_trip():
    for p in (0.4999, 0.25, 0.05, 1e-3, 1e-6, 1e-12, 1e-30, 1e-100):
        t = gaussian_tail_inv(p)
        assert abs(gaussian_tail(t) - p) <= 1e-12
        # and to relative precision where the tail is representable
        assert gaussian_tail(t) == pytest.approx(p, rel=1e-9)


def test_inverse_symmetric_side():
    assert gaussian_tail_inv(0.5) == 0.0
    assert gaussian_tail_inv(0.8) == pytest.approx(-gaussian_tail_inv(0.2), abs=1e-13)


def test_inverse_domain_errors():
    for p in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            gaussian_tail_inv(p)


def test_log_tail_matches_mpmath_far_out():
    for t in (10.0, 20.0, 36.0, 36.5, 40.0, 72.0):
        expected = float(mpmath.log(mpmath.erfc(t / mpmath.sqrt(2)) / 2))
        assert log_gaussian_tail(t) == pytest.approx(expected, rel=1e-10)


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=-8.0, max_value=8.0, allow_nan=False))
def test_tail_monotone_decreasing(t):
    assert gaussian_tail(t + 1e-6) <= gaussian_tail(t)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-12, max_value=0.499))
def test_inverse_is_right_inverse(p):
    assert gaussian_tail(gaussian_tail_inv(p)) == pytest.approx(p, rel=1e-9)
