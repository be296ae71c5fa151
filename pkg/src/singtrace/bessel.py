"""Modified and ordinary Bessel evaluations, zeros, and kernel-bound predicates.

Scaled values e^{-x} I_nu(x) and e^{x} K_nu(x) are the canonical internal
representation; unscaled values are derived from them.  Large orders are
routed through the uniform large-order expansion in log space so that
products like K_nu(a) I_nu(b) stay computable long after the individual
factors have left the double range.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as sp

from . import olver
from .errors import RangeError, RootFindError

_LOG_MAX = math.log(np.finfo(float).max)  # ~709.78

# Above this order the scipy backends ive/kve start under/overflowing for
# small arguments; the 9-term uniform expansion is accurate to ~1e-13 there.
_NU_UNIFORM = 250.0
_UNIFORM_TERMS = 9


def _validate(nu, x):
    nu = np.asarray(nu, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(nu)) or np.any(nu < 0):
        raise ValueError("order nu must be finite and >= 0")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("argument x must be finite and > 0")
    return nu, x


def _small_x_log_i(nu, x):
    """log I_nu(x) by the ascending series, for x << nu where ive underflows."""
    q = x * x / 4.0
    term = np.ones_like(q)
    acc = np.ones_like(q)
    for j in range(1, 16):
        term = term * q / (j * (nu + j))
        acc = acc + term
    return nu * np.log(x / 2.0) - sp.gammaln(nu + 1.0) + np.log(acc)


def _small_x_log_k(nu, x):
    """log K_nu(x) for x << nu, dominant (x/2)^{-nu} branch:
    K_nu ~ (1/2) Gamma(nu) (x/2)^{-nu} sum_j (x^2/4)^j / (j! (1-nu)_j)."""
    q = x * x / 4.0
    term = np.ones_like(q)
    acc = np.ones_like(q)
    for j in range(1, 16):
        term = term * q / (j * (j - nu))
        acc = acc + term
    return math.log(0.5) + sp.gammaln(nu) + nu * np.log(2.0 / x) + np.log(acc)


def log_bessel_i(nu, x):
    """log I_nu(x), finite wherever I_nu(x) is positive and finite in log space."""
    nu, x = _validate(nu, x)
    nu, x = np.broadcast_arrays(nu, x)
    out = np.empty(nu.shape, dtype=float)
    big = nu >= _NU_UNIFORM
    if np.any(big):
        out[big] = olver.log_olver_uniform("I", nu[big], x[big] / nu[big],
                                           terms=_UNIFORM_TERMS)
    rest = ~big
    if np.any(rest):
        v = sp.ive(nu[rest], x[rest])
        r = np.empty(v.shape)
        ok = v > 0
        r[ok] = np.log(v[ok]) + x[rest][ok]
        if np.any(~ok):
            r[~ok] = _small_x_log_i(nu[rest][~ok], x[rest][~ok])
        out[rest] = r
    return out if out.shape else float(out)


def log_bessel_k(nu, x):
    """log K_nu(x)."""
    nu, x = _validate(nu, x)
    nu, x = np.broadcast_arrays(nu, x)
    out = np.empty(nu.shape, dtype=float)
    big = nu >= _NU_UNIFORM
    if np.any(big):
        out[big] = olver.log_olver_uniform("K", nu[big], x[big] / nu[big],
                                           terms=_UNIFORM_TERMS)
    rest = ~big
    if np.any(rest):
        v = sp.kve(nu[rest], x[rest])
        r = np.empty(v.shape)
        ok = np.isfinite(v)
        r[ok] = np.log(v[ok]) - x[rest][ok]
        if np.any(~ok):
            r[~ok] = _small_x_log_k(np.maximum(nu[rest][~ok], 1.0), x[rest][~ok])
        out[rest] = r
    return out if out.shape else float(out)


def bessel_i(nu, x, scaled: bool = False):
    """I_nu(x), or e^{-x} I_nu(x) when scaled=True.

    Raises RangeError if the unscaled value would overflow the double range.
    """
    nu, x = _validate(nu, x)
    li = log_bessel_i(nu, x)
    if scaled:
        return np.exp(li - x) if np.ndim(li) else float(np.exp(li - x))
    if np.any(np.asarray(li) > _LOG_MAX):
        raise RangeError(
            "I_nu(x) overflows the double range; request the scaled variant")
    return np.exp(li) if np.ndim(li) else float(np.exp(li))


def bessel_k(nu, x, scaled: bool = False):
    """K_nu(x) > 0, or e^{x} K_nu(x) when scaled=True.

    Raises RangeError if the unscaled value would overflow (small x at
    large order).
    """
    nu, x = _validate(nu, x)
    lk = log_bessel_k(nu, x)
    if scaled:
        return np.exp(lk + x) if np.ndim(lk) else float(np.exp(lk + x))
    if np.any(np.asarray(lk) > _LOG_MAX):
        raise RangeError(
            "K_nu(x) overflows the double range; request the scaled variant")
    return np.exp(lk) if np.ndim(lk) else float(np.exp(lk))


def besseli_ratio(nu, z):
    """I_{nu+1}(z) / I_nu(z), stable for all nu >= 0, z > 0.

    Direct scaled quotient ive(nu+1,z)/ive(nu,z) where that does not
    underflow (z not too far below nu); Gautschi's continued fraction on
    the remaining lanes, where it converges quickly.  Vectorized over nu.
    """
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    if z <= 0:
        raise ValueError("z must be positive")
    out = np.empty(nu.shape)
    direct = nu <= max(1.1 * z, z + 30.0)
    if np.any(direct):
        lo = sp.ive(nu[direct], z)
        hi = sp.ive(nu[direct] + 1.0, z)
        good = lo > 1e-290
        vals = np.empty(lo.shape)
        vals[good] = hi[good] / lo[good]
        if np.any(~good):
            vals[~good] = _cf_ratio(nu[direct][~good], z)
        out[direct] = vals
    rest = ~direct
    if np.any(rest):
        out[rest] = _cf_ratio(nu[rest], z)
    return out


def _cf_ratio(nu, z):
    """Gautschi continued fraction for I_{nu+1}/I_nu.

    Each lane freezes at its own convergence step, so a lane's value
    never depends on which other orders share the batch."""
    tiny = 1e-300
    f = np.full(nu.shape, tiny)
    C = np.full(nu.shape, tiny)
    D = np.zeros(nu.shape)
    done = np.zeros(nu.shape, dtype=bool)
    for k in range(100000):
        b = 2.0 * (nu + 1.0 + k) / z
        D = b + D
        D = np.where(np.abs(D) < tiny, tiny, D)
        C = b + 1.0 / C
        C = np.where(np.abs(C) < tiny, tiny, C)
        D = 1.0 / D
        delta = C * D
        f = np.where(done, f, f * delta)
        done |= np.abs(delta - 1.0) < 2e-16
        if np.all(done):
            break
    return f


def bessel_j(nu, x):
    """Ordinary Bessel J_nu(x) (scipy backend)."""
    return sp.jv(nu, x)


def _jv_sign_scan(nu: float, lo: float, hi: float, step: float = 1.5):
    """Brackets of all zeros of J_nu in (lo, hi].

    Consecutive positive zeros of J_nu are separated by more than 3 for
    every nu >= 0, so a step of 1.5 cannot skip a pair.
    """
    grid = np.arange(lo, hi + step, step)
    vals = sp.jv(nu, grid)
    sgn = np.sign(vals)
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    return grid[idx], grid[idx + 1]


def _bisect_refine(f, lo, hi, iters: int = 40, newton=None):
    """Vectorized bisection on sign-change brackets, then guarded Newton."""
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        left = flo * fm > 0
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    x = 0.5 * (lo + hi)
    if newton is not None:
        for _ in range(3):
            fx, dfx = newton(x)
            stepn = fx / dfx
            xn = x - stepn
            bad = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
            x = np.where(bad, 0.5 * (lo + hi), xn)
    return x


def bessel_j_zeros_upto(nu: float, s_max: float,
                        step: float = 1.5) -> np.ndarray:
    """All positive zeros of J_nu up to s_max, ascending.

    `step` is the bracketing scan resolution; any value below the minimal
    zero gap (~3) yields identical results."""
    if s_max <= 0:
        return np.zeros(0)
    lo = max(nu, 1e-8)
    if lo >= s_max:
        return np.zeros(0)
    blo, bhi = _jv_sign_scan(nu, lo, s_max + 1.6, step=step)

    def f(x):
        return sp.jv(nu, x)

    def newton(x):
        return sp.jv(nu, x), sp.jvp(nu, x)

    roots = _bisect_refine(f, blo, bhi, newton=newton)
    return roots[roots <= s_max]


def bessel_j_zero(nu: float, k: int) -> float:
    """k-th positive zero j_{nu,k} of J_nu, absolute error <= 1e-10.

    Strictly increasing in k and in nu.  Brackets are located by a sign
    scan (guaranteed), seeded near the McMahon estimate for large k.
    """
    if nu < 0 or k < 1:
        raise ValueError("need nu >= 0 and k >= 1")
    # generous upper bound for the k-th zero
    a = (k + 0.5 * nu + 0.75) * math.pi
    hi = max(a + 2.0, nu + 2.5 * k + 10.0, nu + 1.9 * nu ** (1.0 / 3.0) + 8.0)
    zeros = bessel_j_zeros_upto(nu, hi)
    while len(zeros) < k:
        hi *= 1.6
        zeros = bessel_j_zeros_upto(nu, hi)
        if hi > 1e8:
            raise RootFindError("zero search exhausted", nu=nu, k=k)
    return float(zeros[k - 1])


def robin_zeros_upto(nu: float, s_max: float,
                     step: float = 1.4) -> np.ndarray:
    """Zeros of d/dx [sqrt(x) J_nu(s x)] at x=1, i.e. of
    g(s) = (1/2 - nu) J_nu(s) + s J_{nu-1}(s), up to s_max.

    For nu = 0, J_{-1} = -J_1 is used.
    """
    if s_max <= 0:
        return np.zeros(0)

    def g(s):
        return (0.5 - nu) * sp.jv(nu, s) + s * sp.jv(nu - 1.0, s)

    lo = max(nu * 0.5, 1e-8)
    grid = np.arange(lo, s_max + 1.6, step)
    vals = g(grid)
    sgn = np.sign(vals)
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    if len(idx) == 0:
        return np.zeros(0)
    roots = _bisect_refine(g, grid[idx], grid[idx + 1])
    return roots[roots <= s_max]


def baricz_ratio_bounds(nu: float, x: float, y: float, z: float,
                        slack: float = 1e-12):
    """Evaluate the two ratio bounds on K_nu with relative slack.

    For x > y > 0, z > 0 the bounds assert

        e^{z(x-y)}  <  K_nu(y z) / K_nu(x z),
        (x/y)^nu    <  K_nu(y z) / K_nu(x z).

    Returns the pair of booleans (exponential bound, power bound).
    """
    if not (x > y > 0) or z <= 0 or nu < 0:
        raise ValueError("need x > y > 0, z > 0, nu >= 0")
    log_ratio = log_bessel_k(nu, y * z) - log_bessel_k(nu, x * z)
    b1 = z * (x - y) < log_ratio + slack * abs(log_ratio)
    b2 = nu * math.log(x / y) < log_ratio + slack * abs(log_ratio)
    return bool(b1), bool(b2)


def composite_k_bound(nu: float, x: float, y: float, z: float,
                      slack: float = 1e-12) -> bool:
    """Check K_nu(xz) < K_nu(yz) (y/x)^{2 nu/3} e^{-z(x-y)/3} (x > y > 0)."""
    if not (x > y > 0) or z <= 0 or nu < 0:
        raise ValueError("need x > y > 0, z > 0, nu >= 0")
    lhs = log_bessel_k(nu, x * z)
    rhs = (log_bessel_k(nu, y * z) + (2.0 * nu / 3.0) * math.log(y / x)
           - z * (x - y) / 3.0)
    return bool(lhs < rhs + slack * abs(rhs))


def wronskian_defect(nu, x):
    """Relative defect of I_nu(x) K_nu'(x) - I_nu'(x) K_nu(x) = -1/x.

    Uses the scaled functions and the recurrences
    I' = I_{nu+1} + (nu/x) I,  K' = -K_{nu+1} + (nu/x) K.
    """
    nu = np.asarray(nu, dtype=float)
    x = np.asarray(x, dtype=float)
    iv0 = sp.ive(nu, x)
    iv1 = sp.ive(nu + 1, x)
    kv0 = sp.kve(nu, x)
    kv1 = sp.kve(nu + 1, x)
    # e^{-x}I * e^{x}K products cancel the scalings exactly
    w = iv0 * (-kv1 + nu / x * kv0) - (iv1 + nu / x * iv0) * kv0
    return np.abs(w * x + 1.0)
