import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st_

from singtrace.bessel import (baricz_ratio_bounds, bessel_i, bessel_j_zero,
                              bessel_j_zeros_upto, bessel_k, besseli_ratio,
                              composite_k_bound, log_bessel_i, log_bessel_k,
                              robin_zeros_upto, wronskian_defect)
from singtrace.errors import RangeError

mp.mp.dps = 40


def series_besseli(nu, x, terms=None):
    """Independent power-series oracle in extended precision.

    All terms are positive; the largest sits near j ~ x/2, so the term
    count scales with the argument."""
    if terms is None:
        terms = int(2.5 * x) + 150
    nu = mp.mpf(nu)
    x = mp.mpf(x)
    q = x * x / 4
    term = (x / 2) ** nu / mp.gamma(nu + 1)
    acc = term
    for j in range(1, terms):
        term *= q / (j * (nu + j))
        acc += term
    return acc


def integral_besselk(nu, x):
    """Independent integral-representation oracle:
    K_nu(x) = int_0^inf e^{-x cosh t} cosh(nu t) dt.

    The integrand dies once x cosh t dominates nu t; a finite interval
    keeps the tanh-sinh rule fast."""
    nu = mp.mpf(nu)
    x = mp.mpf(x)
    t_max = mp.mpf(2) * (mp.log(2 * nu / x + 2) + 8) / 1 + 3
    # extra break points resolve the sharp peak at t ~ 1/sqrt(x)
    return mp.quad(lambda t: mp.e ** (-x * mp.cosh(t)) * mp.cosh(nu * t),
                   [0, mp.mpf(1) / 50, mp.mpf(1) / 10, mp.mpf(1) / 2, 1, 3,
                    t_max])


def test_besseli_half_integer_closed_form():
    assert bessel_i(0.5, 2.0) == pytest.approx(
        math.sqrt(2.0 / (math.pi * 2.0)) * math.sinh(2.0), rel=1e-13)


def test_besseli_small_argument_limit():
    assert bessel_i(0.0, 1e-12) == pytest.approx(1.0, rel=1e-10)


def test_besseli_series_oracle():
    got = bessel_i(5.0, 10.0)
    want = float(series_besseli(5, 10))
    assert got == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("nu,x", [(0.0, 0.3), (1.5, 7.0), (20.0, 2.0),
                                  (63.2, 40.0), (199.0, 650.0)])
def test_besseli_accuracy_grid(nu, x):
    want = float(series_besseli(nu, x))
    assert bessel_i(nu, x) == pytest.approx(want, rel=1e-12)


def test_besselk_half_integer_closed_form():
    assert bessel_k(0.5, 3.0) == pytest.approx(
        math.sqrt(math.pi / 6.0) * math.exp(-3.0), rel=1e-13)


def test_besselk_integral_oracle():
    got = bessel_k(2.0, 1.0)
    want = float(integral_besselk(2, 1))
    assert got == pytest.approx(want, rel=1e-12)
    assert got == pytest.approx(1.62483889, rel=1e-8)


def test_besselk_monotone_in_x():
    assert bessel_k(1.0, 2.0) > bessel_k(1.0, 3.0)


@pytest.mark.parametrize("nu,x", [(0.3, 0.05), (7.0, 3.0), (150.0, 500.0)])
def test_besselk_accuracy_grid(nu, x):
    want = float(integral_besselk(nu, x))
    assert bessel_k(nu, x) == pytest.approx(want, rel=1e-12)


def test_scaled_variants():
    assert bessel_i(1.0, 600.0, scaled=True) == pytest.approx(
        float(series_besseli(1, 600) * mp.e ** -600), rel=1e-12)
    assert bessel_k(1.0, 600.0, scaled=True) == pytest.approx(
        float(mp.besselk(1, 600) * mp.e ** 600), rel=1e-12)


def test_unscaled_overflow_raises():
    with pytest.raises(RangeError):
        bessel_i(0.0, 1200.0)
    with pytest.raises(RangeError):
        bessel_k(400.0, 0.01)


def test_input_validation():
    with pytest.raises(ValueError):
        bessel_i(-1.0, 1.0)
    with pytest.raises(ValueError):
        bessel_k(1.0, 0.0)


def test_log_variants_extreme_orders():
    for nu, x in [(900.0, 2.0), (3000.0, 40.0)]:
        want_i = float(mp.log(mp.besseli(mp.mpf(nu), mp.mpf(x))))
        want_k = float(mp.log(mp.besselk(mp.mpf(nu), mp.mpf(x))))
        assert abs(log_bessel_i(nu, x) - want_i) < 5e-12 * max(1, abs(want_i))
        assert abs(log_bessel_k(nu, x) - want_k) < 5e-12 * max(1, abs(want_k))


def test_wronskian_identity_grid(rng):
    nus = rng.uniform(0.0, 60.0, 400)
    xs = rng.uniform(0.05, 300.0, 400)
    assert float(np.max(wronskian_defect(nus, xs))) < 1e-10


def test_besseli_ratio_against_mpmath():
    for nu, z in [(0.0, 3.0), (2.5, 0.4), (40.0, 8.0), (500.0, 100.0)]:
        want = float(mp.besseli(nu + 1, z) / mp.besseli(nu, z))
        got = float(besseli_ratio(np.array([nu]), z)[0])
        assert got == pytest.approx(want, rel=1e-12)


# ---------------------------------------------------------------- zeros

def bisect_j0_first_zero():
    """Oracle: bisection on an independently implemented J_0 series."""
    def j0(x):
        x = mp.mpf(x)
        term = mp.mpf(1)
        acc = mp.mpf(1)
        for k in range(1, 80):
            term *= -(x * x / 4) / (k * k)
            acc += term
        return acc

    lo, hi = mp.mpf(2), mp.mpf(3)
    for _ in range(80):
        mid = (lo + hi) / 2
        if j0(lo) * j0(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return float((lo + hi) / 2)


def test_first_zero_of_j0_oracle():
    want = bisect_j0_first_zero()
    assert bessel_j_zero(0.0, 1) == pytest.approx(want, abs=1e-10)
    assert bessel_j_zero(0.0, 1) == pytest.approx(2.404825557695773, abs=1e-12)


def test_half_integer_zeros_are_multiples_of_pi():
    for n in (1, 2, 7, 30):
        assert bessel_j_zero(0.5, n) == pytest.approx(n * math.pi, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(nu=st_.floats(0.0, 40.0), k=st_.integers(1, 25))
def test_zero_interlacing(nu, k):
    a = bessel_j_zero(nu, k)
    b = bessel_j_zero(nu + 1.0, k)
    c = bessel_j_zero(nu, k + 1)
    assert a < b < c


def test_zeros_match_scipy_integer_orders():
    from scipy.special import jn_zeros
    for n in (0, 3, 11):
        want = jn_zeros(n, 12)
        got = bessel_j_zeros_upto(float(n), want[-1] + 0.5)
        assert np.allclose(got, want, atol=1e-10)


def test_zeros_scan_resolution_invariance():
    a = bessel_j_zeros_upto(3.7, 60.0, step=1.5)
    b = bessel_j_zeros_upto(3.7, 60.0, step=0.37)
    assert len(a) == len(b)
    assert np.max(np.abs(a - b)) < 1e-12


def test_robin_zeros_interlace_dirichlet():
    rz = robin_zeros_upto(2.0, 40.0)
    dz = bessel_j_zeros_upto(2.0, 40.0)
    # one Robin root before the first Dirichlet zero, then interlacing
    assert rz[0] < dz[0]
    for i in range(min(len(rz), len(dz)) - 1):
        assert dz[i] < rz[i + 1] < dz[i + 1]


# ------------------------------------------------------ inequality suite

def test_baricz_examples():
    assert baricz_ratio_bounds(2.0, 1.0, 0.5, 3.0) == (True, True)
    assert baricz_ratio_bounds(0.1, 2.0, 0.1, 10.0) == (True, True)


def test_baricz_near_equal_arguments():
    # x -> y+: both ratios -> 1+, bounds hold with vanishing margin
    ok1, ok2 = baricz_ratio_bounds(1.3, 0.5 + 1e-9, 0.5, 4.0)
    assert ok1 and ok2


def test_baricz_randomized(rng):
    for _ in range(2000):
        y = rng.uniform(0.01, 3.0)
        x = y + rng.uniform(1e-3, 3.0)
        nu = rng.uniform(1e-6, 20.0)
        z = rng.uniform(1e-2, 50.0)
        b1, b2 = baricz_ratio_bounds(nu, x, y, z)
        assert b1 and b2
        assert composite_k_bound(nu, x, y, z)


def test_diag_product_bound(rng):
    # y K_nu(yz) I_nu(yz) <= C / z with one empirical constant
    ys = rng.uniform(0.05, 1.0, 3000)
    zs = rng.uniform(0.5, 300.0, 3000)
    nus = rng.uniform(0.0, 40.0, 3000)
    vals = ys * np.exp(log_bessel_k(nus, ys * zs)
                       + log_bessel_i(nus, ys * zs)) * zs
    c_emp = float(np.max(vals))
    assert c_emp < 0.75  # observed ~0.51; the bound is the structural claim
