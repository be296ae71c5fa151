import math

import mpmath as mp
import numpy as np
import pytest

from singtrace.errors import CapabilityError, HypothesisViolation
from singtrace.sal import (SymbolProvider, ZetaTerm, fd_derivative,
                           power_log_continuation, regularized_integral,
                           regularized_power_integral, sal_expand,
                           substituted_integral, unit_power_log_integral,
                           verify_hypotheses_family, verify_sal)
from singtrace.symbols import make_symbol

mp.mp.dps = 30

EULER_GAMMA = 0.5772156649015329


# -------------------------------------------------- regularized integrals

def test_plain_integral_exponential():
    val = regularized_integral(lambda z: math.exp(-z), [], -math.inf)
    assert val == pytest.approx(1.0, abs=1e-11)


def test_finite_part_of_one_over_one_plus_zeta():
    # analytic continuation of int (1+z)^{-s} at s=1 has finite part 0
    val = regularized_integral(lambda z: 1.0 / (1.0 + z),
                               [(-1.0, 0, 1.0), (-2.0, 0, -1.0)],
                               -3.0)
    assert val == pytest.approx(0.0, abs=1e-10)


def test_linearity(rng):
    f1 = lambda z: math.exp(-2.0 * z)
    f2 = lambda z: 1.0 / (1.0 + z * z)
    e2 = [(-2.0, 0, 1.0), (-4.0, 0, -1.0)]
    a, b = 2.25, -1.5
    v1 = regularized_integral(f1, [], -math.inf)
    v2 = regularized_integral(f2, e2, -6.0)
    v = regularized_integral(lambda z: a * f1(z) + b * f2(z),
                             [(al, j, b * c) for al, j, c in e2], -6.0)
    assert v == pytest.approx(a * v1 + b * v2, rel=1e-9)


def test_shallow_window_capability_error():
    with pytest.raises(CapabilityError):
        regularized_integral(lambda z: 1.0 / (1.0 + z), [(-1.0, 0, 1.0)],
                             -0.5)


def test_continuation_closed_forms():
    # int_1^inf z^a log^j z -> (-1)^{j+1} j!/(a+1)^{j+1}
    assert power_log_continuation(-3.0, 0) == pytest.approx(0.5)
    assert power_log_continuation(-3.0, 1) == pytest.approx(0.25)
    assert power_log_continuation(-1.0, 5) == 0.0
    # int_0^1 x^a log^j x -> (-1)^j j!/(a+1)^{j+1}
    assert unit_power_log_integral(1.0, 1) == pytest.approx(-0.25)
    assert unit_power_log_integral(-1.0, 2) == 0.0


def test_regularized_matches_ordinary_on_integrable(rng):
    # 20 randomized absolutely integrable functions
    for _ in range(20):
        a = rng.uniform(0.5, 3.0)
        p = rng.uniform(2.2, 5.0)
        c1 = rng.uniform(-2.0, 2.0)
        c2 = rng.uniform(-2.0, 2.0)

        def f(z, a=a, p=p, c1=c1, c2=c2):
            return c1 * math.exp(-a * z) + c2 * (1.0 + z) ** (-p)

        want = c1 / a + c2 / (p - 1.0)
        got = regularized_integral(f, [(-p, 0, c2)], -p - 1.0)
        assert got == pytest.approx(want, abs=1e-9, rel=1e-9)


def test_regularized_power_integral_gamma_fp():
    # finite part of int_0^inf e^{-x} x^{-4} dx equals FP Gamma(-3),
    # whose Laurent finite part is -psi(4)/3!
    want = -(11.0 / 6.0 - EULER_GAMMA) / 6.0
    got = regularized_power_integral(lambda x: math.exp(-x), -4.0, 0,
                                     jet=lambda k: (-1.0) ** k)
    assert got == pytest.approx(want, rel=1e-10)


def test_regularized_power_integral_ordinary_case():
    got = regularized_power_integral(lambda x: math.exp(-x), 1.5, 0,
                                     jet=lambda k: (-1.0) ** k)
    assert got == pytest.approx(float(mp.gamma(2.5)), rel=1e-10)


def test_fd_derivative():
    f = lambda x: math.exp(2.0 * x)
    for k in (1, 2, 3, 4):
        assert fd_derivative(f, 0.0, k) == pytest.approx(2.0 ** k, rel=1e-7)


# ------------------------------------------------------------ expansion

def test_trivial_symbol_substitution_is_identity():
    sym = make_symbol("compact-bump")
    series = sal_expand(sym, k_max=3, alpha_min=-4.0)
    const = series.coeff(0.0, 0)
    want = float(mp.quad(lambda x: mp.e ** (-1 / (1 - x * x)), [0, 1]))
    assert const == pytest.approx(want, rel=1e-8)
    for p, l, c in series.terms:
        if (p, l) != (0.0, 0):
            assert abs(c) < 1e-10


def test_toy_symbol_oracle_coefficients():
    sym = make_symbol("exp-lorentz2")
    series = sal_expand(sym, k_max=4, alpha_min=-5.0)
    assert series.coeff(-1.0, 0) == pytest.approx(math.pi / 4.0, rel=1e-10)
    assert series.coeff(-2.0, 0) == pytest.approx(-0.5, rel=1e-10)
    assert series.coeff(-3.0, 0) == pytest.approx(math.pi / 8.0, rel=1e-10)
    assert series.coeff(-4.0, 0) == pytest.approx(
        1.0 / 12.0 + (EULER_GAMMA - 11.0 / 6.0) / 6.0, rel=1e-9)
    assert series.coeff(-4.0, 1) == pytest.approx(-1.0 / 6.0, rel=1e-10)


def test_separable_coefficient_closed_form():
    # phi = x^2(1-x)^2 on [0,1], g ~ zeta^{-2}: coefficient of z^{-2} is
    # the regularized integral of phi(x) x^{-2} = int_0^1 (1-x)^2 = 1/3
    sym = make_symbol("separable-poly", power=2)
    series = sal_expand(sym, k_max=2, alpha_min=-3.0)
    assert series.coeff(-2.0, 0) == pytest.approx(1.0 / 3.0, rel=1e-9)


def test_sal_linearity():
    s1 = make_symbol("exp-lorentz2")
    s2 = make_symbol("separable-poly", power=4)
    a, b = 2.0, -0.75

    def ev(x, zeta):
        return a * s1.eval(x, zeta) + b * s2.eval(x, zeta)

    terms = [ZetaTerm(t.alpha, t.j,
                      (lambda x, t=t, c=a: c * t.sigma(x)),
                      (lambda k, t=t, c=a: c * t.sigma_jet(k)))
             for t in s1.zeta_expansion]
    terms += [ZetaTerm(t.alpha, t.j,
                       (lambda x, t=t, c=b: c * t.sigma(x)),
                       (lambda k, t=t, c=b: c * t.sigma_jet(k)))
              for t in s2.zeta_expansion]
    terms.sort(key=lambda t: -t.alpha)
    combo = SymbolProvider(
        eval=ev, zeta_expansion=terms, remainder_order=-10.0,
        x_derivs_at_0=lambda k: (
            lambda zeta: a * s1.x_derivs_at_0(k)(zeta)
            + b * s2.x_derivs_at_0(k)(zeta)),
        x_derivs=lambda j, x, zeta: a * s1.deriv(j, x, zeta)
        + b * s2.deriv(j, x, zeta))
    sc = sal_expand(combo, k_max=3, alpha_min=-4.0)
    e1 = sal_expand(s1, k_max=3, alpha_min=-4.0)
    e2 = sal_expand(s2, k_max=3, alpha_min=-4.0)
    want = e1.scaled(a).plus(e2.scaled(b))
    for p, l, c in sc.terms:
        assert c == pytest.approx(want.coeff(p, l), rel=1e-8, abs=1e-11)


def test_scaling_symmetry():
    # replacing g(zeta) by g(c zeta) multiplies the zeta^alpha coefficient
    # by c^alpha on the expansion family
    c = 2.0
    base = make_symbol("separable-poly", power=2)

    def ev(x, zeta):
        return base.eval(x, c * zeta)

    terms = [ZetaTerm(t.alpha, t.j,
                      (lambda x, t=t: c ** t.alpha * t.sigma(x)),
                      (lambda k, t=t: c ** t.alpha * t.sigma_jet(k)))
             for t in base.zeta_expansion]
    scaled = SymbolProvider(
        eval=ev, zeta_expansion=terms, remainder_order=base.remainder_order,
        x_derivs_at_0=lambda k: (
            lambda zeta: base.x_derivs_at_0(k)(c * zeta)),
        x_derivs=lambda j, x, zeta: base.deriv(j, x, c * zeta))
    es = sal_expand(scaled, k_max=1, alpha_min=-3.0)
    eb = sal_expand(base, k_max=1, alpha_min=-3.0)
    assert es.coeff(-2.0, 0) == pytest.approx(
        c ** -2.0 * eb.coeff(-2.0, 0), rel=1e-8)


def test_verify_sal_toy_symbol_slopes():
    sym = make_symbol("exp-lorentz2")
    rep = verify_sal(sym, k_max=4, alpha_min=-5.0)
    checked = [o for o in rep["orders"] if o.get("residual_slope") is not None]
    assert len(checked) >= 4
    for o in checked[:4]:
        assert abs(o["residual_slope"] - o["expected_slope"]) <= 0.2
    assert rep["all_ok"]


def test_verify_sal_trivial_symbol_machine_precision():
    sym = make_symbol("compact-bump")
    rep = verify_sal(sym, k_max=2, alpha_min=-3.0,
                     z_grid=np.geomspace(5.0, 100.0, 7))
    assert rep["orders"][-1]["max_rel_residual"] < 1e-8


def test_hypothesis_rejection_for_singular_symbol():
    sym = make_symbol("singular-at-zero")
    with pytest.raises(HypothesisViolation):
        sal_expand(sym, k_max=1, alpha_min=-5.0)


def test_direct_quadrature_sanity():
    sym = make_symbol("exp-lorentz2")
    z = 40.0
    val = substituted_integral(sym, z)
    want = float(mp.quad(lambda x: mp.e ** (-x) / (1 + (x * z) ** 2) ** 2,
                         [0, 1.0 / z, 1, mp.inf]))
    assert val == pytest.approx(want, rel=1e-10)


def test_uniformity_probe_over_contexts():
    reports = verify_hypotheses_family(
        lambda w: make_symbol("exp-lorentz2", width=w), (0.5, 1.0, 2.0),
        k_max=2)
    assert len(reports) == 3
    for rep in reports.values():
        assert rep["integrability"]["ok"]
