import math
from fractions import Fraction

import numpy as np
import pytest

from singtrace.bessel import bessel_i, bessel_k, log_bessel_i
from singtrace.errors import CapabilityError
from singtrace.olver import (K_MAX, OlverFrame, eta, log_olver_uniform,
                             olver_uniform, p_of_t, u_polynomials)


def test_u0_is_one():
    assert u_polynomials(0) == [[Fraction(1)]]


def test_u1_closed_form():
    # U_1(p) = (3p - 5p^3)/24
    u1 = u_polynomials(1)[1]
    assert u1 == [Fraction(0), Fraction(1, 8), Fraction(0), Fraction(-5, 24)]


def test_u_degrees():
    polys = u_polynomials(5)
    for k, poly in enumerate(polys):
        assert len(poly) - 1 <= 3 * k
    assert len(polys[2]) - 1 == 6  # deg U_2 = 6 exactly


def test_u_capability_error():
    with pytest.raises(CapabilityError):
        u_polynomials(K_MAX + 1)


def test_frame_variables():
    fr = OlverFrame.at(1.0)
    assert fr.p == pytest.approx(1.0 / math.sqrt(2.0))
    assert fr.eta == pytest.approx(math.sqrt(2.0) + math.log(1.0 / (1 + math.sqrt(2.0))))
    # eta strictly increasing in t
    ts = np.linspace(0.05, 20.0, 50)
    assert np.all(np.diff(eta(ts)) > 0)
    assert np.all((p_of_t(ts) > 0) & (p_of_t(ts) <= 1))


def test_leading_term_value_oracle():
    # (I, nu=50, t=1, terms=1) -> e^{50 eta(1)} / ((2 pi 50)^{1/2} 2^{1/4})
    eta1 = math.sqrt(2.0) + math.log(1.0 / (1.0 + math.sqrt(2.0)))
    want = math.exp(50.0 * eta1) / (math.sqrt(2.0 * math.pi * 50.0) * 2.0 ** 0.25)
    assert olver_uniform("I", 50.0, 1.0, terms=1) == pytest.approx(want, rel=1e-14)


def test_k_leading_ratio_tends_to_one():
    t = 0.7
    prev = None
    for nu in (10.0, 40.0, 160.0):
        ratio = olver_uniform("K", nu, t, terms=1) / bessel_k(nu, nu * t)
        err = abs(ratio - 1.0)
        if prev is not None:
            assert err < prev / 3.0
        prev = err
    assert err < 1e-3


def _sup_rel_err(kind, nu, terms, ts):
    errs = []
    for t in ts:
        la = log_olver_uniform(kind, nu, t, terms=terms)
        lt = log_bessel_i(nu, nu * t)
        errs.append(abs(math.expm1(la - lt)))
    return max(errs)


def test_truncation_shrink_doubling_nu():
    # invariant: sup-error ratio >= 2^{terms-1} when nu doubles
    ts = np.geomspace(0.01, 100.0, 60)
    for terms in (2, 3, 4):
        e20 = _sup_rel_err("I", 20.0, terms, ts)
        e40 = _sup_rel_err("I", 40.0, terms, ts)
        assert e20 / e40 >= 2.0 ** (terms - 1)


def test_four_correction_terms_shrink_by_16():
    # retaining U_1..U_4 (error order nu^-5): factor >= 16 under doubling
    ts = np.geomspace(0.01, 100.0, 60)
    e20 = _sup_rel_err("I", 20.0, 5, ts)
    e40 = _sup_rel_err("I", 40.0, 5, ts)
    assert e20 / e40 >= 16.0


def test_uniform_capability_error():
    with pytest.raises(CapabilityError):
        olver_uniform("I", 30.0, 1.0, terms=K_MAX + 2)


def test_olver_matches_mpmath_large_order():
    import mpmath as mp
    cases = [(300.0, 0.03), (300.0, 0.8), (300.0, 2.0), (800.0, 0.05),
             (800.0, 0.6)]
    for nu, t in cases:
        la = float(log_olver_uniform("K", nu, t, terms=8))
        # working precision sized to the exponent so mpmath's hypercomb
        # converges for strongly scaled values
        with mp.workdps(int(abs(la) * 0.45) + 60):
            lt = float(mp.log(mp.besselk(mp.mpf(nu), mp.mpf(nu) * mp.mpf(t))))
        assert abs(la - lt) < 1e-11 * max(1.0, abs(lt))
