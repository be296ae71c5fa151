"""Expansion engine for integrals of the substituted form int_0^inf sigma(x, x z) dx.

Given a symbol sigma(x, zeta) with (i) x-jets at 0 and (ii) a large-zeta
expansion sigma ~ sum sigma_{alpha j}(x) zeta^alpha log^j zeta, the z -> inf
expansion of the substituted integral consists of three term families:

1.  z^{-k-1} * (1/k!) * reg-int_0^inf zeta^k (d/dx)^k sigma(0, zeta) dzeta,
2.  the exact contributions reg-int_0^inf sigma_{alpha j}(x) (xz)^alpha
    log^j(xz) dx, expanded binomially into z^alpha log^l z,
3.  interaction terms at integer alpha <= -1,
        (d/dx)^{-alpha-1} sigma_{alpha j}(0) * z^alpha log^{j+1} z
            / ((j+1) (-alpha-1)!),

with all divergent integrals regularized by analytic continuation in the
exponent: int_1^inf zeta^a log^j zeta dzeta -> (-1)^{j+1} j!/(a+1)^{j+1}
for a != -1, and finite part 0 at a = -1.  The same convention is applied
at x -> 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import CapabilityError, HypothesisViolation
from .series import ExpansionSeries

_QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-12, limit=400)


def _quad(f, a, b, **kw):
    import warnings
    from scipy.integrate import IntegrationWarning
    opts = dict(_QUAD_OPTS)
    opts.update(kw)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(f, a, b, **opts)
    return val


@dataclass
class ZetaTerm:
    """One term sigma_{alpha j}(x) zeta^alpha log^j zeta of the symbol's
    large-zeta expansion; sigma must decay rapidly in x."""

    alpha: float
    j: int
    sigma: callable
    sigma_jet: callable = None   # k -> d^k sigma / dx^k at 0 (optional)

    def jet(self, k: int) -> float:
        if self.sigma_jet is not None:
            return float(self.sigma_jet(k))
        return fd_derivative(self.sigma, 0.0, k)


@dataclass
class SymbolProvider:
    """Evaluator bundle for a symbol sigma(x, zeta).

    Attributes
    ----------
    eval : callable (x, zeta) -> value, smooth in x
    zeta_expansion : list of ZetaTerm, exponents strictly decreasing
    remainder_order : decay exponent of the remainder after subtracting
        the listed terms (must be < -1 to regularize the k = 0 family;
        lower by k for family k)
    x_derivs_at_0 : optional callable k -> (zeta -> d^k/dx^k sigma(0, zeta))
    x_derivs : optional callable (j, x, zeta) for the integrability probe
    x_max : range over which rapid x-decay is checked
    name : label used in reports
    context : opaque parameter tag (threaded through unchanged)
    """

    eval: callable
    zeta_expansion: list
    remainder_order: float
    x_derivs_at_0: callable = None
    x_derivs: callable = None
    x_max: float = 30.0
    name: str = "symbol"
    context: dict = field(default_factory=dict)

    def __post_init__(self):
        alphas = [t.alpha for t in self.zeta_expansion]
        if sorted(alphas, reverse=True) != alphas:
            raise ValueError("zeta expansion exponents must be non-increasing")

    def deriv_at_0(self, k: int):
        """(d/dx)^k sigma(0, zeta) as a function of zeta."""
        if self.x_derivs_at_0 is not None:
            return self.x_derivs_at_0(k)
        return lambda zeta: fd_derivative(lambda x: self.eval(x, zeta), 0.0, k)

    def deriv(self, j: int, x: float, zeta: float) -> float:
        if self.x_derivs is not None:
            return self.x_derivs(j, x, zeta)
        if j == 0:
            return self.eval(x, zeta)
        return fd_derivative(lambda t: self.eval(t, zeta), x, j)


# ----------------------------------------------------------------------
# finite differences with Richardson refinement

_FD_STEPS = (0.2, 0.1, 0.05, 0.025, 0.0125)


def fd_derivative(f, x0: float, k: int, steps=_FD_STEPS) -> float:
    """k-th derivative by central differences, Richardson-refined.

    The step sweep doubles as a stability check: the returned value is
    the refinement level at which successive estimates agree best.
    """
    if k == 0:
        return float(f(x0))
    ests = []
    for h in steps:
        offsets = np.arange(-k, k + 1)
        # central difference weights on the stencil {-k..k} h
        A = np.vander(offsets, increasing=True).T
        rhs = np.zeros(2 * k + 1)
        rhs[k] = math.factorial(k)
        wts = np.linalg.solve(A, rhs)
        vals = np.array([f(x0 + o * h) for o in offsets], dtype=float)
        ests.append(float(np.dot(wts, vals)) / h ** k)
    # Richardson in h^2
    tab = [ests]
    fac = (steps[0] / steps[1]) ** 2
    for lvl in range(1, len(ests)):
        prev = tab[-1]
        tab.append([(fac ** lvl * prev[i + 1] - prev[i]) / (fac ** lvl - 1.0)
                    for i in range(len(prev) - 1)])
    return tab[-1][0]


# ----------------------------------------------------------------------
# regularized integrals

def power_log_continuation(a: float, j: int) -> float:
    """Analytic continuation of int_1^inf zeta^a log^j zeta dzeta.

    Equals (-1)^{j+1} j! / (a+1)^{j+1} away from a = -1; the finite part
    at a = -1 is 0 by convention.
    """
    if abs(a + 1.0) < 1e-9:
        return 0.0
    return (-1.0) ** (j + 1) * math.factorial(j) / (a + 1.0) ** (j + 1)


def unit_power_log_integral(a: float, j: int) -> float:
    """int_0^1 x^a log^j x dx continued in a: (-1)^j j!/(a+1)^{j+1},
    finite part 0 at a = -1."""
    if abs(a + 1.0) < 1e-9:
        return 0.0
    return (-1.0) ** j * math.factorial(j) / (a + 1.0) ** (j + 1)


def regularized_integral(f, expansion, remainder_order: float,
                         lower_behavior: str = "integrable") -> float:
    """Finite part of int_0^inf f(zeta) dzeta.

    Parameters
    ----------
    f : integrand, integrable at 0
    expansion : list of (alpha, j, coeff) valid as zeta -> inf
    remainder_order : decay exponent of f minus the listed terms; must be
        below -1, otherwise the remainder is not integrable and a
        CapabilityError is raised.
    """
    if lower_behavior != "integrable":
        raise CapabilityError("only integrable lower behavior is supported")
    if remainder_order >= -1.0 - 1e-12:
        raise CapabilityError(
            f"expansion window too shallow: remainder order "
            f"{remainder_order} is not integrable at infinity")
    subtract = [(a, j, c) for a, j, c in expansion if a >= -1.0 - 1e-12]
    head = _quad(f, 0.0, 1.0)

    def tail_integrand(u):
        zeta = 1.0 / u
        val = f(zeta)
        for a, j, c in subtract:
            val -= c * zeta ** a * math.log(zeta) ** j
        return val / (u * u)

    tail = _quad(tail_integrand, 0.0, 1.0, points=[0.0, 1e-6, 1e-3])
    cont = sum(c * power_log_continuation(a, j) for a, j, c in subtract)
    return head + tail + cont


def _taylor_order(alpha: float) -> int:
    """Number of Taylor terms to subtract so x^alpha (g - T) is integrable
    at 0, with exponent collisions at -1 routed to the finite part."""
    if alpha >= -1.0 + 1e-9:
        return 0
    near_int = abs(alpha - round(alpha)) < 1e-9
    if near_int:
        return int(-round(alpha))
    return int(math.ceil(-alpha - 1.0))


def _incomplete_power_log(beta: float, l: int, s: float) -> float:
    """int_0^s x^beta log^l x dx for beta > -1 (recursion by parts)."""
    if beta <= -1.0:
        raise ValueError("need beta > -1")
    val = s ** (beta + 1.0) / (beta + 1.0)
    for i in range(1, l + 1):
        val = (s ** (beta + 1.0) * math.log(s) ** i - i * val) / (beta + 1.0)
    return val


def regularized_power_integral(g, alpha: float, logpow: int, jet=None,
                               analytic_jets: bool = None) -> float:
    """Finite part of int_0^inf g(x) x^alpha log^logpow(x) dx.

    g must be smooth at 0 and rapidly decaying.  Divergences at x -> 0
    are removed by subtracting the Taylor polynomial of g; the monomial
    integrals are continued in the exponent (finite part 0 at the -1
    collision).  Below a switch point the subtracted remainder g - T is
    evaluated from higher jets instead of by direct subtraction, which
    would lose all significant digits against the x^alpha amplification.
    """
    if jet is None:
        jet = lambda k: fd_derivative(g, 0.0, k)
        if analytic_jets is None:
            analytic_jets = False
    if analytic_jets is None:
        analytic_jets = True
    R = _taylor_order(alpha)

    def outer_integrand(x):
        return g(x) * x ** alpha * math.log(x) ** logpow

    outer = _quad(outer_integrand, 1.0, np.inf)
    if R == 0:
        # plainly integrable at 0: no subtraction machinery
        def plain(x):
            return x ** alpha * math.log(x) ** logpow * g(x)

        return _quad(plain, 0.0, 1.0, points=[0.0, 1e-4, 1e-2]) + outer

    extra = 6 if analytic_jets else 2
    r_big = R + extra
    delta = 0.2 if analytic_jets else 0.02
    tcoef = [jet(r) / math.factorial(r) for r in range(r_big)]

    def taylor(x):
        return sum(tcoef[r] * x ** r for r in range(r_big))

    # finite-part pieces of the subtracted Taylor terms on [0, 1]
    closed = sum(tcoef[r] * unit_power_log_integral(alpha + r, logpow)
                 for r in range(r_big))

    # [delta, 1]: direct subtraction is safe above the switch point
    def head_integrand(x):
        return x ** alpha * math.log(x) ** logpow * (g(x) - taylor(x))

    head = _quad(head_integrand, delta, 1.0)

    # [0, delta]: jet continuation of the remainder
    lower = 0.0
    for r in range(r_big, r_big + 5):
        c = jet(r) / math.factorial(r)
        lower += c * _incomplete_power_log(alpha + r, logpow, delta)

    return head + closed + lower + outer


# ----------------------------------------------------------------------
# admissibility probes

def probe_remainder(symbol: SymbolProvider, x_samples=(0.0, 0.5),
                    zeta_range=(30.0, 3000.0), n: int = 12) -> dict:
    """Check that the declared expansion really absorbs the symbol up to
    the declared remainder order (log-log slope test)."""
    zetas = np.geomspace(*zeta_range, n)
    worst = -np.inf
    for x in x_samples:
        rem = np.empty(n)
        floor = np.empty(n)
        for i, z in enumerate(zetas):
            val = symbol.eval(x, z)
            terms = [t.sigma(x) * z ** t.alpha * math.log(z) ** t.j
                     for t in symbol.zeta_expansion]
            rem[i] = val - sum(terms)
            floor[i] = 4e-16 * (abs(val) + sum(abs(t) for t in terms))
        # only points safely above the rounding floor carry slope information
        mask = np.abs(rem) > 25.0 * floor
        if mask.sum() < 4:
            continue
        slope = np.polyfit(np.log(zetas[mask]), np.log(np.abs(rem[mask])), 1)[0]
        worst = max(worst, slope)
    ok = worst == -np.inf or worst <= symbol.remainder_order + 0.35
    return {"worst_slope": None if worst == -np.inf else float(worst),
            "declared": symbol.remainder_order, "ok": bool(ok)}


def probe_integrability(symbol: SymbolProvider, k_max: int, c0: float = 1.0,
                        thetas=(0.0, 0.5, 1.0), n: int = 24) -> dict:
    """Integrability of y^j |sigma^{(j)}(theta y t, y xi)| over the unit
    square, at |xi| = c0, for j = 0..k_max."""
    from scipy.special import roots_legendre
    nodes, wts = roots_legendre(n)
    y = 0.5 * (nodes + 1.0)
    wy = 0.5 * wts
    constants = []
    for j in range(k_max + 1):
        worst = 0.0
        for theta in thetas:
            acc = 0.0
            for yi, wi in zip(y, wy):
                for ti, wti in zip(y, wy):
                    v = symbol.deriv(j, theta * yi * ti, yi * c0)
                    if not np.isfinite(v):
                        raise HypothesisViolation(
                            f"sigma^({j}) not integrable near x=0",
                            assumption="integrability")
                    acc += wi * wti * yi ** j * abs(v)
            worst = max(worst, acc)
        if not np.isfinite(worst) or worst > 1e12:
            raise HypothesisViolation(
                f"integrability constant C_{j} diverges",
                assumption="integrability")
        constants.append(worst)
    return {"constants": constants, "ok": True}


def probe_decay(symbol: SymbolProvider) -> dict:
    """Rapid decay of every sigma_{alpha j} out to x_max."""
    xs = np.geomspace(1.0, symbol.x_max, 8)
    rates = []
    for t in symbol.zeta_expansion:
        vals = np.abs(np.array([t.sigma(x) for x in xs], dtype=float))
        ref = max(abs(t.sigma(0.5)), 1e-280)
        if vals[-1] > ref * xs[-1] ** (-2):
            raise HypothesisViolation(
                f"sigma_({t.alpha},{t.j}) does not decay rapidly",
                assumption="decay")
        rates.append(float(vals[-1] / ref))
    return {"tail_ratios": rates, "ok": True}


def verify_hypotheses(symbol: SymbolProvider, k_max: int) -> dict:
    out = {"remainder": probe_remainder(symbol),
           "integrability": probe_integrability(symbol, k_max),
           "decay": probe_decay(symbol)}
    if not out["remainder"]["ok"]:
        raise HypothesisViolation("remainder bound fails the declared order",
                                  assumption="remainder")
    return out


def verify_hypotheses_family(make_symbol, contexts, k_max: int) -> dict:
    """Run the probes over a sample set of the opaque parameter."""
    return {repr(s): verify_hypotheses(make_symbol(s), k_max)
            for s in contexts}


# ----------------------------------------------------------------------
# the expansion itself

def sal_expand(symbol: SymbolProvider, k_max: int, alpha_min: float,
               check: bool = True) -> ExpansionSeries:
    """Asymptotic expansion of int_0^inf sigma(x, xz) dx as z -> inf.

    Emits the scaling family (powers z^{-k-1}, k <= k_max), the expansion
    family (powers z^alpha with binomial log splitting), and the
    interaction family (integer alpha <= -1, log power j+1).  Terms with
    alpha below alpha_min are outside the requested window and dropped.
    """
    diagnostics = {}
    if check:
        diagnostics["hypotheses"] = verify_hypotheses(symbol, k_max)
    window_terms = [t for t in symbol.zeta_expansion
                    if t.alpha >= alpha_min - 1e-12]
    terms = []

    # family 1: x-jets at 0 against regularized zeta-integrals
    for k in range(k_max + 1):
        rem_k = symbol.remainder_order + k
        if rem_k >= -1.0 - 1e-12:
            raise CapabilityError(
                f"zeta expansion too shallow to regularize the k={k} term "
                f"(remainder order {rem_k})")
        dk = symbol.deriv_at_0(k)
        f_k = lambda zeta, dk=dk, k=k: zeta ** k * dk(zeta)
        exp_k = [(t.alpha + k, t.j, t.jet(k)) for t in symbol.zeta_expansion]
        val = regularized_integral(f_k, exp_k, rem_k)
        terms.append((-k - 1.0, 0, val / math.factorial(k)))

    # family 2: x-integrals of the expansion coefficients
    for t in window_terms:
        for ell in range(t.j + 1):
            xi = regularized_power_integral(
                t.sigma, t.alpha, t.j - ell,
                jet=(t.sigma_jet if t.sigma_jet is not None else None))
            terms.append((t.alpha, ell, math.comb(t.j, ell) * xi))

    # family 3: interaction terms at integer alpha <= -1
    for t in window_terms:
        if t.alpha <= -1.0 + 1e-9 and abs(t.alpha - round(t.alpha)) < 1e-9:
            n = int(-round(t.alpha)) - 1
            coeff = t.jet(n) / ((t.j + 1) * math.factorial(n))
            terms.append((t.alpha, t.j + 1, coeff))

    series = ExpansionSeries(terms, validity=(1.0, np.inf),
                             diagnostics=diagnostics)
    series.diagnostics["k_max"] = k_max
    series.diagnostics["alpha_min"] = alpha_min
    return series


def substituted_integral(symbol: SymbolProvider, z: float) -> float:
    """Direct quadrature of int_0^inf sigma(x, xz) dx."""
    split = max(1.0 / z, 1e-3)

    def f(x):
        return symbol.eval(x, x * z)

    head = _quad(f, 0.0, split)
    mid = _quad(f, split, 2.0)

    def far(u):
        x = 2.0 / u
        return f(x) * 2.0 / (u * u)

    tail = _quad(far, 1e-12, 1.0)
    return head + mid + tail


def verify_sal(symbol: SymbolProvider, k_max: int, alpha_min: float,
               z_grid=None, slope_tol: float = 0.2,
               series: ExpansionSeries = None) -> dict:
    """Compare predicted partial sums against direct quadrature.

    For each order (one power level, log terms grouped) the remainder
    after subtracting the partial sum is fitted on the z-grid; its
    log-log slope (log-adjusted when the next order carries logs) must
    match the next exponent within slope_tol.  Diagnostics are always
    produced; per-order pass flags mark failures.
    """
    if series is None:
        series = sal_expand(symbol, k_max, alpha_min)
    if z_grid is None:
        z_grid = np.geomspace(20.0, 2000.0, 13)
    z_grid = np.asarray(z_grid, dtype=float)
    direct = np.array([substituted_integral(symbol, z) for z in z_grid])
    groups = series.grouped_by_power()
    orders = []
    partial = np.zeros_like(direct)
    scale = np.abs(direct)
    for idx, (power, logterms) in enumerate(groups):
        for l, c in logterms:
            partial = partial + c * z_grid ** power * np.log(z_grid) ** l
        resid = direct - partial
        entry = {"power": power,
                 "coeffs": {str(l): c for l, c in logterms},
                 "max_rel_residual": float(
                     np.max(np.abs(resid) / scale))}
        if idx + 1 < len(groups):
            p_next, lt_next = groups[idx + 1]
            l_next = max(l for l, _ in lt_next)
            mask = np.abs(resid) > 1e-15 * scale
            if mask.sum() >= 3:
                y = np.log(np.abs(resid[mask]))
                if l_next > 0:
                    y = y - l_next * np.log(np.log(z_grid[mask]))
                slope = float(np.polyfit(np.log(z_grid[mask]), y, 1)[0])
                entry["residual_slope"] = slope
                entry["expected_slope"] = float(p_next)
                entry["ok"] = bool(abs(slope - p_next) <= slope_tol)
            else:
                entry["residual_slope"] = None
                entry["expected_slope"] = float(p_next)
                entry["ok"] = True  # residual at machine precision
        orders.append(entry)
    return {"orders": orders, "z_window": [float(z_grid[0]),
                                           float(z_grid[-1])],
            "all_ok": all(o.get("ok", True) for o in orders)}
