import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracto.kernel import (
    AccuracyWarning,
    FractionalOrder,
    PoleError,
    a_alpha,
    continuum_symbol,
    coupling_spectrum_direct,
    coupling_spectrum_series,
    crossover_k0,
    gamma_real,
    riemann_zeta,
    transform_symbol,
)

mp.mp.dps = 30

# Frozen values (closed forms checked against mpmath below)
SQRT_PI = 1.7724538509055159
ZETA_1P5 = 2.6123753486854883
ZETA_M0P5 = -0.2078862249773545
A_HALF = -5.0132565492620005  # -2 sqrt(2 pi)
A_1P5 = -3.3421710328413300  # -4 sqrt(2 pi) / 3


def test_frozen_constants_match_mpmath():
    assert ZETA_1P5 == pytest.approx(float(mp.zeta(1.5)), rel=1e-15)
    assert ZETA_M0P5 == pytest.approx(float(mp.zeta(-0.5)), rel=1e-14)
    assert A_HALF == pytest.approx(float(-2 * mp.sqrt(2 * mp.pi)), rel=1e-15)
    assert A_1P5 == pytest.approx(float(2 * mp.gamma(-1.5) * mp.cos(0.75 * mp.pi)), rel=1e-15)


@pytest.mark.parametrize(
    "x, expected",
    [(0.5, SQRT_PI), (-0.5, -2 * SQRT_PI), (-1.5, 4 * SQRT_PI / 3)],
)
def test_gamma_examples(x, expected):
    assert gamma_real(x) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, -3.0, -1e-13])
def test_gamma_poles_rejected(x):
    with pytest.raises(PoleError):
        gamma_real(x)


@pytest.mark.parametrize("s", np.linspace(-10.0, 20.0, 61))
def test_zeta_against_mpmath(s):
    if abs(s - 1.0) < 1e-6:
        return
    assert riemann_zeta(s) == pytest.approx(float(mp.zeta(s)), abs=1e-10)


def test_zeta_examples_and_pole():
    assert riemann_zeta(2.0) == pytest.approx(math.pi**2 / 6, abs=1e-12)
    assert riemann_zeta(4.0) == pytest.approx(math.pi**4 / 90, abs=1e-12)
    assert riemann_zeta(-0.5) == pytest.approx(ZETA_M0P5, abs=1e-10)
    assert riemann_zeta(-4.0) == 0.0
    with pytest.raises(PoleError):
        riemann_zeta(1.0)


def test_a_alpha_closed_forms():
    assert a_alpha(0.5) == pytest.approx(A_HALF, rel=1e-12)
    assert a_alpha(1.5) == pytest.approx(A_1P5, rel=1e-12)
    assert a_alpha(1.21) == 2 * gamma_real(-1.21) * math.cos(0.605 * math.pi)
    with pytest.raises(ValueError):
        a_alpha(1.0)


@pytest.mark.parametrize("alpha", [0.0, 4.0, -1.0, math.nan])
def test_fractional_order_range(alpha):
    with pytest.raises(ValueError):
        FractionalOrder(alpha)


def test_fractional_order_integer_flag():
    assert FractionalOrder(2.0).is_integer
    with pytest.raises(ValueError, match="non-integer"):
        FractionalOrder(1.0).require_fractional()


def test_direct_sum_at_zero_is_twice_zeta():
    r = coupling_spectrum_direct(3.0, 0.0)
    assert r.value == pytest.approx(math.pi**4 / 45, abs=1e-10)
    assert r.tail_bound == pytest.approx(2e-18 / 3)


def test_direct_sum_rejects_short_truncation():
    with pytest.raises(ValueError):
        coupling_spectrum_direct(1.5, 0.1, n_max=999)


def test_direct_tail_bound_holds_without_correction():
    alpha = 0.5
    exact = 2 * float(mp.zeta(1.5))
    r = coupling_spectrum_direct(alpha, 0.0, n_max=1000, tail_correction=False)
    assert 0.0 < exact - r.value <= r.tail_bound


@pytest.mark.parametrize("alpha", [0.5, 1.21, 1.51, 1.91])
@pytest.mark.parametrize("kdx", [0.1, 0.3, 0.6, 0.9])
def test_series_matches_direct(alpha, kdx):
    direct = coupling_spectrum_direct(alpha, kdx).value
    series = coupling_spectrum_series(alpha, kdx)
    assert abs(series - direct) <= 1e-6


def test_series_matches_polylog_oracle():
    alpha, k = 1.21, 0.3
    z = mp.exp(1j * k)
    oracle = float(mp.re(mp.polylog(1 + alpha, z) + mp.polylog(1 + alpha, 1 / z)))
    assert coupling_spectrum_series(alpha, k) == pytest.approx(oracle, abs=1e-12)


@pytest.mark.parametrize("dx", [0.5, 1.0, 3.0])
def test_series_at_zero(dx):
    assert coupling_spectrum_series(0.5, 0.0, dx) == pytest.approx(2 * ZETA_1P5, abs=1e-12)


def test_series_leading_terms_small_k():
    alpha, k = 1.21, 1e-4
    lead = 2 * riemann_zeta(2.21) + a_alpha(alpha) * k**alpha
    assert coupling_spectrum_series(alpha, k) == pytest.approx(lead, abs=1e-7)


def test_series_domain_and_warning():
    with pytest.raises(ValueError):
        coupling_spectrum_series(1.5, 2 * math.pi)
    with pytest.warns(AccuracyWarning):
        coupling_spectrum_series(1.5, 6.0, n_terms=3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        coupling_spectrum_series(1.5, 0.3)


@pytest.mark.parametrize("alpha", [0.5, 0.8, 1.21, 1.51, 1.91])
@pytest.mark.parametrize("k", [0.0, 0.2, 0.7, 1.3])
def test_periodicity_in_k(alpha, k):
    dx = 1.0
    base = coupling_spectrum_direct(alpha, k, dx, n_max=200_000)
    shifted = coupling_spectrum_direct(alpha, k + 2 * math.pi / dx, dx, n_max=200_000)
    assert abs(base.value - shifted.value) <= base.tail_bound


@settings(max_examples=25, deadline=None)
@given(
    alpha=st.floats(0.2, 1.9).filter(lambda a: abs(a - 1) > 0.01),
    k=st.floats(0.0, 3.0),
)
def test_spectra_even_in_k(alpha, k):
    assert transform_symbol(alpha, k) == transform_symbol(alpha, -k)
    assert continuum_symbol(alpha, k) == continuum_symbol(alpha, -k)
    assert coupling_spectrum_series(alpha, k) == pytest.approx(coupling_spectrum_series(alpha, -k), abs=1e-14)


def test_transform_symbol_examples():
    assert transform_symbol(1.21, 0.0, 1.0) == 0.0
    assert transform_symbol(0.5, 1.0, 1.0) == pytest.approx(A_HALF - ZETA_M0P5, abs=1e-9)
    assert transform_symbol(0.5, 1.0, 1.0) == pytest.approx(-4.8053703, abs=1e-7)


def test_continuum_symbol_examples():
    assert continuum_symbol(1.21, 0.0) == 0.0
    assert continuum_symbol(2.5, 2.0) == pytest.approx(-4 * ZETA_1P5, rel=1e-12)
    assert continuum_symbol(1.5, 1.0) == pytest.approx(A_1P5, rel=1e-12)


@pytest.mark.parametrize("alpha", [1.0, 2.0, 3.0, 0.0 + 1e-12])
def test_branches_reject_integers(alpha):
    with pytest.raises(ValueError):
        transform_symbol(alpha, 1.0)


@pytest.mark.parametrize("alpha", [0.3, 1.21, 1.7])
def test_transform_tends_to_continuum(alpha):
    k = 0.7
    for dx in (0.1, 0.01, 0.001):
        gap = abs(transform_symbol(alpha, k, dx) - continuum_symbol(alpha, k))
        assert gap <= dx ** (2 - alpha) * abs(riemann_zeta(alpha - 1)) * k * k + 1e-14


@pytest.mark.parametrize("alpha", [3.2, 3.5, 3.8])
def test_quadratic_regime_below_crossover(alpha):
    k = crossover_k0(alpha, 1.0) / 10
    quad = -riemann_zeta(alpha - 1) * k * k
    assert abs(transform_symbol(alpha, k, 1.0) - quad) / abs(quad) <= 0.1


@pytest.mark.parametrize("alpha", [2.3, 2.5, 3.5])
def test_fractional_share_scales_with_distance_to_crossover(alpha):
    # |a k^alpha| / |zeta k^2| = (k / k0)**(alpha - 2)
    k = crossover_k0(alpha, 1.0) / 10
    quad = -riemann_zeta(alpha - 1) * k * k
    share = abs(transform_symbol(alpha, k, 1.0) - quad) / abs(quad)
    assert share == pytest.approx(10.0 ** (2 - alpha), rel=1e-10)


def test_crossover_k0_examples():
    assert crossover_k0(0.5, 1.0) == pytest.approx(abs(A_HALF / ZETA_M0P5) ** (2 / 3), rel=1e-12)
    assert crossover_k0(0.5, 1.0) == pytest.approx(8.346982, abs=1e-6)
    assert crossover_k0(1.21, 2.0) == pytest.approx(crossover_k0(1.21, 1.0) / 2, rel=1e-14)
    expected = abs(a_alpha(1.21) / riemann_zeta(0.21)) ** (1 / 0.79) / 0.999
    assert crossover_k0(1.21, 0.999) == pytest.approx(expected, rel=1e-14)


def test_crossover_balances_the_two_terms():
    alpha, dx = 1.4, 0.7
    k0 = crossover_k0(alpha, dx)
    frac = abs(a_alpha(alpha)) * k0**alpha
    quad = dx ** (2 - alpha) * abs(riemann_zeta(alpha - 1)) * k0 * k0
    assert frac == pytest.approx(quad, rel=1e-12)
