"""Named test symbols with analytic jets and expansion data."""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError
from .sal import SymbolProvider, ZetaTerm


def exp_lorentz2(width: float = 1.0, n_terms: int = 4) -> SymbolProvider:
    """sigma(x, zeta) = e^{-x} (1 + zeta^2)^{-2}.

    Large-zeta expansion: (1+zeta^2)^{-2} = sum_i (-1)^i (i+1) zeta^{-4-2i},
    so sigma_{alpha,0}(x) = (-1)^i (i+1) e^{-x} at alpha = -4-2i.
    """
    if width <= 0:
        raise ConfigError("symbol width must be positive")
    w = width

    def ev(x, zeta):
        return math.exp(-x / w) / (1.0 + zeta * zeta) ** 2

    def dk0(k):
        return lambda zeta: (-1.0 / w) ** k / (1.0 + zeta * zeta) ** 2

    def dj(j, x, zeta):
        return (-1.0 / w) ** j * math.exp(-x / w) / (1.0 + zeta * zeta) ** 2

    terms = []
    for i in range(n_terms):
        c = (-1.0) ** i * (i + 1)
        terms.append(ZetaTerm(
            alpha=-4.0 - 2.0 * i, j=0,
            sigma=lambda x, c=c: c * math.exp(-x / w),
            sigma_jet=lambda k, c=c: c * (-1.0 / w) ** k))
    return SymbolProvider(eval=ev, zeta_expansion=terms,
                          remainder_order=-4.0 - 2.0 * n_terms,
                          x_derivs_at_0=dk0, x_derivs=dj,
                          name=f"exp-lorentz2(w={w:g})")


def separable_poly(power: int = 2) -> SymbolProvider:
    """sigma(x, zeta) = phi(x) g(zeta), phi = x^2 (1-x)^2 on [0,1],
    g = (1+zeta^2)^{-power/2}-type with leading zeta^{-power}."""
    if power < 2 or power % 2:
        raise ConfigError("power must be an even integer >= 2")
    half = power // 2

    def phi(x):
        x = np.asarray(x, dtype=float)
        inside = (x >= 0) & (x <= 1)
        out = np.where(inside, (x * (1.0 - x)) ** 2, 0.0)
        return out if out.shape else float(out)

    def phi_jet(k):
        # x^2 - 2x^3 + x^4
        coeffs = {2: 2.0, 3: -12.0, 4: 24.0}
        return coeffs.get(k, 0.0)

    def g(zeta):
        return (1.0 + zeta * zeta) ** (-half)

    def ev(x, zeta):
        return phi(x) * g(zeta)

    def dk0(k):
        return lambda zeta: phi_jet(k) * g(zeta)

    _poly = np.polynomial.polynomial.Polynomial([0, 0, 1, -2, 1])

    def dj(j, x, zeta):
        x = float(x)
        if not 0 <= x <= 1 or j > 4:
            return 0.0
        return _poly.deriv(j)(x) * g(zeta) if j else _poly(x) * g(zeta)

    terms = []
    for i in range(3):
        c = (-1.0) ** i * math.comb(half + i - 1, i)
        terms.append(ZetaTerm(
            alpha=-float(power + 2 * i), j=0,
            sigma=lambda x, c=c: c * phi(x),
            sigma_jet=lambda k, c=c: c * phi_jet(k)))
    return SymbolProvider(eval=ev, zeta_expansion=terms,
                          remainder_order=-float(power + 6),
                          x_derivs_at_0=dk0, x_derivs=dj,
                          name=f"separable-poly(p={power})")


def compact_bump(scale: float = 1.0) -> SymbolProvider:
    """zeta-independent symbol sigma(x, zeta) = phi(x), a smooth bump."""

    def phi(x):
        x = np.asarray(x, dtype=float)
        t = x / scale
        inside = t < 1.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.where(inside, np.exp(-1.0 / np.maximum(1.0 - t * t,
                                                            1e-300)), 0.0)
        return out if out.shape else float(out)

    def ev(x, zeta):
        return phi(x)

    term = ZetaTerm(alpha=0.0, j=0, sigma=phi,
                    sigma_jet=lambda k: _bump_jet(k, scale))
    return SymbolProvider(eval=ev, zeta_expansion=[term],
                          remainder_order=-np.inf,
                          x_derivs_at_0=lambda k: (
                              lambda zeta: _bump_jet(k, scale)),
                          x_derivs=lambda j, x, zeta: _bump_fd(j, x, scale),
                          x_max=0.999 * scale,
                          name=f"compact-bump(s={scale:g})")


def _bump_jet(k: int, scale: float) -> float:
    if k == 0:
        return math.exp(-1.0)
    from .sal import fd_derivative

    def phi(x):
        t = x / scale
        return math.exp(-1.0 / (1.0 - t * t)) if abs(t) < 1 else 0.0

    return fd_derivative(phi, 0.0, k)


def _bump_fd(j: int, x: float, scale: float) -> float:
    from .sal import fd_derivative

    def phi(t):
        u = t / scale
        return math.exp(-1.0 / (1.0 - u * u)) if abs(u) < 1 else 0.0

    if j == 0:
        return phi(x)
    return fd_derivative(phi, x, j)


def singular_at_zero() -> SymbolProvider:
    """Integrability violator: sigma = (1/x) e^{-x} (1+zeta^2)^{-2}."""

    def ev(x, zeta):
        return math.exp(-x) / (max(x, 0.0) * (1.0 + zeta * zeta) ** 2) \
            if x > 0 else math.inf

    term = ZetaTerm(alpha=-4.0, j=0,
                    sigma=lambda x: math.exp(-x) / x if x > 0 else math.inf)
    return SymbolProvider(eval=ev, zeta_expansion=[term],
                          remainder_order=-6.0,
                          x_derivs=lambda j, x, zeta: ev(x, zeta) if j == 0
                          else math.inf,
                          name="singular-at-zero")


REGISTRY = {
    "exp-lorentz2": exp_lorentz2,
    "separable-poly": separable_poly,
    "compact-bump": compact_bump,
    "singular-at-zero": singular_at_zero,
}


def make_symbol(name: str, **params) -> SymbolProvider:
    if name not in REGISTRY:
        raise ConfigError(f"unknown symbol {name!r}; "
                          f"known: {sorted(REGISTRY)}")
    return REGISTRY[name](**params)
