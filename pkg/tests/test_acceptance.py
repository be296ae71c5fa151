"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the lines as they
appear.  Criteria 4 and 5 are implemented exactly as stated; the clauses
that assert stable detection of logarithmic coefficients the flat model
geometry does not actually possess are expected to fail, and the failure
messages carry the measured numbers.
"""

import json
import math
import time

import numpy as np
import pytest

from singtrace.bessel import (baricz_ratio_bounds, composite_k_bound,
                              log_bessel_i, wronskian_defect)
from singtrace.conetrace import (ConeProblem, ConeTraceEngine, mode_trace,
                                 mode_trace_eigensum, offdiag_decay_probe)
from singtrace.edgetrace import EdgeProblem, EdgeTraceEngine
from singtrace.fitting import FitBasis, fit_expansion, stability_probe
from singtrace.olver import log_olver_uniform
from singtrace.sal import regularized_integral, verify_sal
from singtrace.spectra import circle_scalar_spectrum, iterated_cone_spectrum
from singtrace.symbols import make_symbol
from singtrace.weyl import weyl_coefficient

RESULTS = []


def record(criterion, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    RESULTS.append(line)
    print("\n" + line)
    return ok


# ----------------------------------------------------------------- 1

def test_criterion_1_oracle_equivalence_cone():
    t0 = time.time()
    worst_mode = 0.0
    for nu in (0.5, 1.7, 3.2, 7.0):
        for z in (1.0, 5.0, 25.0):
            q = mode_trace(nu, z)
            e = mode_trace_eigensum(nu, z, 1)
            worst_mode = max(worst_mode, abs(q - e) / q)

    beta = 0.7
    worst_full = 0.0
    for z in (8.0, 32.0, 128.0, 512.0):
        cutoff = max(2.5 * z, 300.0)
        spec = circle_scalar_spectrum(beta, int(beta * cutoff))
        engine = ConeTraceEngine(ConeProblem(spec, m=2))
        k = engine.value(z, route="kernel", tail="none")[0]
        e = engine.value(z, route="eigensum", tail="none")[0]
        worst_full = max(worst_full, abs(k - e) / k)
    elapsed = time.time() - t0
    ok = worst_mode <= 1e-8 and worst_full <= 1e-6 and elapsed <= 120.0
    record(1, ok, f"mode-level {worst_mode:.2e} (tol 1e-8), "
                  f"full-trace {worst_full:.2e} (tol 1e-6), "
                  f"runtime {elapsed:.0f}s (limit 120s)")
    assert worst_mode <= 1e-8
    assert worst_full <= 1e-6
    assert elapsed <= 120.0


# ----------------------------------------------------------------- 2

def test_criterion_2_weyl_cone():
    beta = 0.7
    spec = circle_scalar_spectrum(beta, 450)
    engine = ConeTraceEngine(ConeProblem(spec, m=2))
    zs = np.geomspace(8.0, 128.0, 33)
    samples = engine.samples(zs, route="ratio", tail="correct")
    basis = FitBasis([(float(-p), 0) for p in range(2, 7)],
                     z_window=(8.0, 128.0))
    fitted = fit_expansion(samples, basis)
    got = fitted.coeff(-2.0, 0)
    want = beta / 4.0
    rel = abs(got - want) / want
    ok = rel <= 0.01
    record(2, ok, f"z^-2 coefficient {got:.6f} vs beta/4 = {want}: "
                  f"{100*rel:.3f}% (tol 1%)")
    assert ok


# ----------------------------------------------------------------- 3

EDGE_BETA, EDGE_L = 0.7, 3.0


@pytest.fixture(scope="module")
def edge_samples():
    spec = circle_scalar_spectrum(EDGE_BETA, 1000)
    engine = EdgeTraceEngine(EdgeProblem(ConeProblem(spec, m=2), b=1,
                                         L=EDGE_L))
    zs = np.geomspace(6.0, 128.0, 49)
    return engine.samples(zs)


def test_criterion_3_weyl_edge(edge_samples):
    basis = FitBasis([(float(-p), 0) for p in range(1, 7)],
                     z_window=(8.0, 96.0))
    fitted = fit_expansion(edge_samples, basis)
    got = fitted.coeff(-1.0, 0)
    want = weyl_coefficient(3, 2, EDGE_L * math.pi * EDGE_BETA)
    rel = abs(got - want) / want
    ok = rel <= 0.02
    record(3, ok, f"z^-1 coefficient {got:.6f} vs (4pi)^-3/2 Gamma(1/2) "
                  f"L pi beta = {want:.6f}: {100*rel:.3f}% (tol 2%)")
    assert ok


# ----------------------------------------------------------------- 4

def test_criterion_4_depth1_log_structure(edge_samples):
    window = (8.0, 64.0)
    pure = FitBasis([(float(-p), 0) for p in range(1, 8)], z_window=window)
    with_log = pure.with_term(-3.0, 1)
    r_pure = fit_expansion(edge_samples, pure).diagnostics["residual"]
    r_log = fit_expansion(edge_samples, with_log).diagnostics["residual"]
    reduces = r_log < r_pure

    probe = stability_probe(edge_samples, with_log, n_subwindows=2,
                            drift_threshold=0.05)
    entry = probe["terms"]["-3,1"]
    drift_ok = entry["drift_rel"] < 0.05

    with_log2 = with_log.with_term(-3.0, 2)
    probe2 = stability_probe(edge_samples, with_log2, n_subwindows=2,
                             drift_threshold=0.05)
    log2_undetected = not probe2["terms"]["-3,2"]["detected"]

    ok = reduces and drift_ok and log2_undetected
    record(4, ok,
           f"log reduces residual: {reduces} ({r_pure:.2e} -> {r_log:.2e}); "
           f"log coefficient {entry['value']:+.2e} drift "
           f"{100*entry['drift_rel']:.0f}% (tol 5%); "
           f"log^2 not detected: {log2_undetected}")
    assert reduces, "log term did not reduce the residual"
    assert log2_undetected, "log^2 term must not be detected at depth 1"
    assert drift_ok, (
        f"log coefficient drift {100*entry['drift_rel']:.0f}% exceeds 5%: "
        f"the flat separable edge model has a vanishing log coefficient "
        f"(subwindow values {entry['subwindow_values']}), so the fitted "
        f"value is noise-scale and cannot be window-stable")


# ----------------------------------------------------------------- 5

@pytest.fixture(scope="module")
def depth2_samples():
    out = {}
    for cutoff in (1000.0, 2000.0):
        inner = circle_scalar_spectrum(0.5, int(cutoff * 0.5) + 2)
        spec = iterated_cone_spectrum(inner, "dirichlet-double", cutoff,
                                      workers=4)
        engine = ConeTraceEngine(ConeProblem(spec, m=2), workers=2)
        zs = np.geomspace(6.0, 128.0, 53)
        out[cutoff] = engine.samples(zs, route="ratio", tail="correct")
    return out


def _depth2_fit(samples, window, with_log2):
    terms = [(float(-p), 0) for p in range(1, 8)] + [(-4.0, 1)]
    if with_log2:
        terms.append((-4.0, 2))
    basis = FitBasis(terms, z_window=window, cond_limit=1e13)
    return fit_expansion(samples, basis)


def test_criterion_5_depth2_log2_structure(depth2_samples):
    window = (8.0, 64.0)
    shifted = (8.0 * math.sqrt(2.0), 64.0 * math.sqrt(2.0))

    r_log = _depth2_fit(depth2_samples[2000.0], window,
                        False).diagnostics["residual"]
    fit_a = _depth2_fit(depth2_samples[2000.0], window, True)
    r_log2 = fit_a.diagnostics["residual"]
    reduces = r_log2 < r_log

    c_hi = fit_a.coeff(-4.0, 2)
    c_lo = _depth2_fit(depth2_samples[1000.0], window, True).coeff(-4.0, 2)
    cutoff_drift = abs(c_hi - c_lo) / max(abs(c_hi), abs(c_lo), 1e-300)
    cutoff_ok = cutoff_drift <= 0.20

    c_sh = _depth2_fit(depth2_samples[2000.0], shifted, True).coeff(-4.0, 2)
    window_drift = abs(c_hi - c_sh) / max(abs(c_hi), abs(c_sh), 1e-300)
    window_ok = window_drift <= 0.20

    # supporting depth-2 structure: the log^1 coefficient is robustly
    # nonzero and cutoff-stable (reported, not part of the criterion)
    l1_hi = _depth2_fit(depth2_samples[2000.0], window, False).coeff(-4.0, 1)
    l1_lo = _depth2_fit(depth2_samples[1000.0], window, False).coeff(-4.0, 1)

    ok = reduces and cutoff_ok and window_ok
    record(5, ok,
           f"log^2 reduces residual: {reduces} ({r_log:.2e} -> {r_log2:.2e}); "
           f"coefficient {c_hi:+.4f}: cutoff-doubling drift "
           f"{100*cutoff_drift:.0f}%, window-shift drift "
           f"{100*window_drift:.0f}% (tol 20%); "
           f"[log^1 = {l1_hi:+.4f}/{l1_lo:+.4f} at the two cutoffs]")
    assert reduces, "log^2 term did not reduce the residual"
    assert cutoff_ok, (
        f"log^2 coefficient drifted {100*cutoff_drift:.0f}% under "
        f"cutoff doubling")
    assert window_ok, (
        f"log^2 coefficient drifted {100*window_drift:.0f}% under the "
        f"window shift ({c_hi:+.4f} -> {c_sh:+.4f}): the 2-dimensional "
        f"cross-section carries no logarithm of its own, so the depth-2 "
        f"trace has a vanishing log^2 coefficient and only the genuine "
        f"log^1 term (stable at {l1_hi:+.3f}) survives window shifts")


# ----------------------------------------------------------------- 6

def test_criterion_6_offdiagonal_decay():
    worst = -math.inf
    slopes = {}
    for nu in (2.0, 3.0, 7.0):
        s = offdiag_decay_probe(nu, ((0.6, 1.0), (0.0, 0.3)))
        slopes[nu] = s
        worst = max(worst, s)
    ok = worst <= -6.0
    record(6, ok, "slopes " + ", ".join(
        f"nu={nu}: {s:.1f}" for nu, s in slopes.items()) + " (need <= -6)")
    assert ok


# ----------------------------------------------------------------- 7

def test_criterion_7_bessel_inequality_suite(rng):
    n = 10 ** 4
    fails = 0
    for _ in range(n):
        y = rng.uniform(0.01, 3.0)
        x = y + rng.uniform(1e-3, 3.0)
        nu = rng.uniform(1e-9, 20.0)
        z = rng.uniform(1e-2, 50.0)
        b1, b2 = baricz_ratio_bounds(nu, x, y, z)
        b3 = composite_k_bound(nu, x, y, z)
        fails += 0 if (b1 and b2 and b3) else 1
    nus = rng.uniform(0.0, 50.0, 500)
    xs = rng.uniform(0.05, 250.0, 500)
    wd = float(np.max(wronskian_defect(nus, xs)))
    ok = fails == 0 and wd <= 1e-10
    record(7, ok, f"{fails} inequality failures in {n} samples; "
                  f"max Wronskian defect {wd:.2e} (tol 1e-10)")
    assert ok


# ----------------------------------------------------------------- 8

def test_criterion_8_olver_uniformity():
    ts = np.geomspace(0.01, 100.0, 60)

    def sup_err(nu, terms):
        errs = []
        for t in ts:
            la = log_olver_uniform("I", nu, t, terms=terms)
            lt = log_bessel_i(nu, nu * t)
            errs.append(abs(math.expm1(la - lt)))
        return max(errs)

    ratio4 = sup_err(20.0, 5) / sup_err(40.0, 5)  # four correction terms
    ratio_strict = sup_err(20.0, 4) / sup_err(40.0, 4)
    ok = ratio4 >= 16.0
    record(8, ok,
           f"sup truncation error shrink nu 20->40: {ratio4:.1f} with four "
           f"correction terms retained (need >= 16); strict four-term "
           f"series reading gives {ratio_strict:.2f}")
    assert ok


# ----------------------------------------------------------------- 9

def test_criterion_9_sal_engine(rng):
    sym = make_symbol("exp-lorentz2")
    rep = verify_sal(sym, k_max=4, alpha_min=-5.0)
    checked = [o for o in rep["orders"]
               if o.get("residual_slope") is not None][:4]
    worst_gap = max(abs(o["residual_slope"] - o["expected_slope"])
                    for o in checked)
    slopes_ok = len(checked) >= 4 and worst_gap <= 0.2

    worst_int = 0.0
    for _ in range(20):
        a = rng.uniform(0.5, 3.0)
        p = rng.uniform(2.2, 5.0)
        c1 = rng.uniform(-2.0, 2.0)
        c2 = rng.uniform(-2.0, 2.0)
        want = c1 / a + c2 / (p - 1.0)
        got = regularized_integral(
            lambda zz, a=a, p=p, c1=c1, c2=c2:
            c1 * math.exp(-a * zz) + c2 * (1.0 + zz) ** (-p),
            [(-p, 0, c2)], -p - 1.0)
        worst_int = max(worst_int, abs(got - want))
    ints_ok = worst_int <= 1e-9
    ok = slopes_ok and ints_ok
    record(9, ok, f"first four residual slopes within "
                  f"{worst_gap:.3f} of the next exponent (tol 0.2); "
                  f"20 ordinary integrals reproduced to {worst_int:.1e} "
                  f"(tol 1e-9)")
    assert ok


# ----------------------------------------------------------------- 10

def test_criterion_10_determinism(tmp_path):
    from singtrace.cli import main as cli_main
    doc = {
        "label": "det",
        "model": {"kind": "cone", "beta": 0.7, "m": 2, "nu_cutoff": 90},
        "z_grid": {"min": 4, "max": 32, "count": 24},
        "fit": {"window": [4, 32], "max_power_order": 4, "max_log_order": 1},
        "routes": ["kernel", "eigensum"],
        "cache_dir": str(tmp_path / "cache"),
        "output_dir": str(tmp_path / "out1"),
        "workers": 1,
    }
    cfg1 = tmp_path / "c1.json"
    cfg1.write_text(json.dumps(doc))
    assert cli_main(["run", str(cfg1)]) == 0
    doc["output_dir"] = str(tmp_path / "out2")
    doc["workers"] = 4
    cfg2 = tmp_path / "c2.json"
    cfg2.write_text(json.dumps(doc))
    assert cli_main(["run", str(cfg2)]) == 0
    names = ["det.report.json", "det.samples.kernel.csv",
             "det.samples.eigensum.csv", "det.spectrum.txt",
             "det.expansion.json"]
    identical = all(
        (tmp_path / "out1" / n).read_bytes()
        == (tmp_path / "out2" / n).read_bytes() for n in names)
    record(10, identical,
           f"reports byte-identical across parallelism degrees 1 and 4: "
           f"{identical}")
    assert identical


def test_zz_summary():
    print("\n" + "=" * 72)
    for line in RESULTS:
        print(line)
    print("=" * 72)
