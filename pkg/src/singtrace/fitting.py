"""Least-squares extraction of power/log expansion coefficients from samples.

The exponent lattice is always supplied by the expansion theorems; only
the coefficients are fitted.  Fits are weighted relatively (each sample
scaled by 1/value), columns are normalized, and the condition number of
the design matrix is part of the result.  A sequential-peeling fallback
for the leading terms provides an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IllConditionedFitError
from .series import ExpansionSeries, term_key

DEFAULT_COND_LIMIT = 1e9


@dataclass
class FitBasis:
    """Fit basis {z^power log^logpow z} on a z-window."""

    terms: list                      # [(power, logpow)]
    z_window: tuple = (8.0, 512.0)
    samples_per_coeff: int = 3
    cond_limit: float = DEFAULT_COND_LIMIT

    def __post_init__(self):
        seen = set()
        for p, l in self.terms:
            key = term_key(p, l)
            if key in seen:
                raise ValueError(f"duplicate basis term {key}")
            seen.add(key)
        if self.samples_per_coeff < 3:
            raise ValueError("need samples_per_coeff >= 3")

    def without(self, power, logpow) -> "FitBasis":
        terms = [(p, l) for p, l in self.terms
                 if term_key(p, l) != term_key(power, logpow)]
        return FitBasis(terms, self.z_window, self.samples_per_coeff,
                        self.cond_limit)

    def with_term(self, power, logpow) -> "FitBasis":
        return FitBasis(self.terms + [(power, logpow)], self.z_window,
                        self.samples_per_coeff, self.cond_limit)


def theorem_basis(dim: int, m: int, strata, max_power_order: int,
                  max_log_order: int, z_window=(8.0, 512.0),
                  samples_per_coeff: int = 3) -> FitBasis:
    """Basis prescribed by the trace expansion theorem.

    Pure powers z^{dim-2m-j}, j = 0..max_power_order-1, plus log-augmented
    terms z^{dimY-2m-j} log^l z for every stratum (dimY, depth) with
    l <= min(depth, max_log_order), restricted to the same power range.
    """
    top = dim - 2 * m
    bottom = top - max_power_order + 1
    terms = [(float(p), 0) for p in range(top, bottom - 1, -1)]
    for dim_y, depth in strata:
        for ell in range(1, min(depth, max_log_order) + 1):
            p_top = dim_y - 2 * m
            for p in range(min(p_top, top), bottom - 1, -1):
                key = (float(p), ell)
                if key not in terms:
                    terms.append(key)
    return FitBasis(terms, z_window, samples_per_coeff)


def _design(z, terms):
    lz = np.log(z)
    cols = [z ** p * lz ** l for p, l in terms]
    return np.column_stack(cols)


def fit_expansion(samples, basis: FitBasis, weight: str = "relative",
                  window=None, relax_count: bool = False) -> ExpansionSeries:
    """Weighted linear least squares of trace samples on the basis.

    `samples` is a TraceSamples or a (z, values) pair.  Samples outside
    the basis z-window are dropped.  Raises IllConditionedFitError when
    the normalized design matrix is numerically rank-deficient.
    """
    z, v = _unpack(samples)
    lo, hi = window if window is not None else basis.z_window
    mask = (z >= lo * (1 - 1e-12)) & (z <= hi * (1 + 1e-12))
    z, v = z[mask], v[mask]
    floor = len(basis.terms) + 2 if relax_count \
        else basis.samples_per_coeff * len(basis.terms)
    if len(z) < floor:
        raise ValueError(
            f"{len(z)} samples for {len(basis.terms)} terms; need >= {floor}")
    A = _design(z, basis.terms)
    if weight == "relative":
        wts = 1.0 / np.abs(v)
    elif weight == "none":
        wts = np.ones_like(v)
    else:
        raise ValueError(f"unknown weight scheme {weight!r}")
    Aw = A * wts[:, None]
    bw = v * wts
    norms = np.linalg.norm(Aw, axis=0)
    norms[norms == 0] = 1.0
    An = Aw / norms
    u_, s_, vt_ = np.linalg.svd(An, full_matrices=False)
    cond = float(s_[0] / s_[-1]) if s_[-1] > 0 else np.inf
    if cond > basis.cond_limit:
        raise IllConditionedFitError(
            f"condition estimate {cond:.3e} exceeds limit "
            f"{basis.cond_limit:.1e}; shrink the basis or widen the window",
            condition=cond)
    coef = vt_.T @ ((u_.T @ bw) / s_)
    coef = coef / norms
    resid = An @ (coef * norms) - bw
    rms = float(np.sqrt(np.mean(resid ** 2)))
    terms = [(p, l, float(c)) for (p, l), c in zip(basis.terms, coef)]
    return ExpansionSeries(terms, validity=(float(z[0]), float(z[-1])),
                           diagnostics={"residual": rms, "condition": cond,
                                        "n_samples": int(len(z))})


def _unpack(samples):
    if hasattr(samples, "z_grid"):
        return np.asarray(samples.z_grid, float), np.asarray(samples.values,
                                                             float)
    z, v = samples
    return np.asarray(z, float), np.asarray(v, float)


def subwindows(z_window, count: int = 2, overlap: float = 0.2):
    """Overlapping geometric subwindows of a z-window."""
    lo, hi = z_window
    lam = np.log(hi / lo)
    width = lam * (1.0 + overlap * (count - 1)) / count
    step = (lam - width) / max(count - 1, 1)
    wins = []
    for i in range(count):
        a = np.log(lo) + i * step
        wins.append((float(np.exp(a)), float(np.exp(a + width))))
    return wins


def stability_probe(samples, basis: FitBasis, n_subwindows: int = 2,
                    drift_threshold: float = 0.05) -> dict:
    """Refit on overlapping z-subwindows and report per-coefficient drift.

    A coefficient is "detected" when its relative drift stays below the
    threshold and its magnitude exceeds the absolute drift.
    """
    if n_subwindows < 2:
        raise ValueError("need at least 2 subwindows")
    full = fit_expansion(samples, basis)
    wins = subwindows(basis.z_window, n_subwindows)
    subs = [fit_expansion(samples, basis, window=w, relax_count=True)
            for w in wins]
    report = {"windows": wins, "terms": {}}
    for p, l, c_full in full.terms:
        vals = np.array([s.coeff(p, l) for s in subs])
        drift_abs = float(vals.max() - vals.min())
        scale = max(abs(c_full), 1e-300)
        drift_rel = drift_abs / scale
        report["terms"][f"{p:g},{l}"] = {
            "power": p, "logpow": l, "value": c_full,
            "subwindow_values": vals.tolist(),
            "drift_abs": drift_abs, "drift_rel": drift_rel,
            "detected": bool(drift_rel < drift_threshold
                             and abs(c_full) > drift_abs),
        }
    report["threshold"] = drift_threshold
    return report


def sal_vs_fit(predicted: ExpansionSeries, fitted: ExpansionSeries,
               tolerance: float = 0.02) -> dict:
    """Per-key relative differences between two series.

    Keys present in exactly one series are listed separately; the
    comparison is insensitive to term order.
    """
    pd = {term_key(p, l): c for p, l, c in predicted.terms}
    fd = {term_key(p, l): c for p, l, c in fitted.terms}
    shared = sorted(set(pd) & set(fd), key=lambda k: (-k[0], k[1]))
    rows = {}
    worst = 0.0
    for key in shared:
        a, b = pd[key], fd[key]
        denom = max(abs(a), abs(b), 1e-300)
        rel = abs(a - b) / denom
        worst = max(worst, rel)
        rows[f"{key[0]:g},{key[1]}"] = {"predicted": a, "fitted": b,
                                        "rel_diff": rel}
    return {
        "shared": rows,
        "only_predicted": [list(k) for k in sorted(set(pd) - set(fd))],
        "only_fitted": [list(k) for k in sorted(set(fd) - set(pd))],
        "max_rel_diff": worst,
        "within_tolerance": worst <= tolerance,
        "tolerance": tolerance,
    }


def peel_leading(samples, powers, n_terms: int = 2):
    """Sequential peeling of the leading coefficients (cross-check only).

    Estimates each coefficient from the largest-z samples, subtracts,
    and repeats.  Returns the first n_terms coefficients.
    """
    z, v = _unpack(samples)
    out = []
    resid = v.copy()
    rho = z[-1] / z[-2]
    for i in range(min(n_terms, len(powers))):
        p = powers[i]
        est = resid * z ** (-p)
        # est(z) ~ c + d/z; two-point extrapolation in 1/z
        c = float((rho * est[-1] - est[-2]) / (rho - 1.0))
        out.append(c)
        resid = resid - c * z ** p
    return out
