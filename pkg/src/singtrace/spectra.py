"""Cross-section spectra of the tangential operator for the model geometries.

A spectrum is the list of pairs (nu, mult) with nu = sqrt of an eigenvalue
of the tangential operator A; the radial mode operator for each entry is
-d^2/dx^2 + (nu^2 - 1/4)/x^2.  Supported builders: the circle of scale
beta (f_dim = 1) and, recursively, the double of the truncated cone over a
given spectrum glued at x = 1 (the "spindle" when the inner spectrum is a
circle).
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bessel import bessel_j_zeros_upto, robin_zeros_upto
from .errors import RootFindError

WITT_NU_THRESHOLD = 1.5  # nu > 3/2 <=> A-eigenvalue > 9/4


@dataclass
class CrossSectionSpectrum:
    """Sorted spectrum {(nu, mult)} of a tangential operator.

    Attributes
    ----------
    nus : ndarray of float, ascending
    mults : ndarray of int, >= 1
    source : provenance tag, one of "analytic" | "computed" | "user-supplied"
    f_dim : dimension of the cross-section
    params : builder parameters (for persistence and caching)
    """

    nus: np.ndarray
    mults: np.ndarray
    source: str
    f_dim: int
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.nus = np.asarray(self.nus, dtype=float)
        self.mults = np.asarray(self.mults, dtype=np.int64)
        if self.nus.size == 0:
            raise ValueError("spectrum must be nonempty")
        if np.any(np.diff(self.nus) < 0):
            raise ValueError("entries must be sorted ascending in nu")
        if np.any(self.mults < 1):
            raise ValueError("multiplicities must be >= 1")
        if np.any(self.nus < 0):
            raise ValueError("nu must be >= 0")

    def __len__(self):
        return len(self.nus)

    @property
    def nu_max(self) -> float:
        return float(self.nus[-1])

    def counting(self):
        """(nu, N(nu)) with N counting eigenvalues (with mult) <= nu."""
        return self.nus, np.cumsum(self.mults)

    def truncated(self, cutoff: float) -> "CrossSectionSpectrum":
        """Sub-spectrum with nu <= cutoff (prefix of the sorted entries)."""
        k = int(np.searchsorted(self.nus, cutoff, side="right"))
        if k == 0:
            raise ValueError("cutoff below the smallest mode")
        params = dict(self.params)
        params["cutoff"] = cutoff
        return CrossSectionSpectrum(self.nus[:k].copy(), self.mults[:k].copy(),
                                    self.source, self.f_dim, params)

    def record_lines(self):
        return ["%.17g %d %s" % (nu, m, self.source)
                for nu, m in zip(self.nus, self.mults)]

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps(self.params, sort_keys=True).encode())
        h.update(str(self.f_dim).encode())
        for line in self.record_lines():
            h.update(line.encode())
            h.update(b"\n")
        return h.hexdigest()


@dataclass
class WittReport:
    """Spectral-gap check: every nu must exceed 3/2 (A > 9/4)."""

    margin: float
    satisfied: bool
    offending_modes: list

    @property
    def as_dict(self):
        return {"margin": self.margin, "satisfied": self.satisfied,
                "offending_modes": [list(m) for m in self.offending_modes]}


def witt_check(spectrum: CrossSectionSpectrum) -> WittReport:
    """Margin min(nu) - 3/2 and the list of modes with nu <= 3/2."""
    margin = float(spectrum.nus[0]) - WITT_NU_THRESHOLD
    bad = spectrum.nus <= WITT_NU_THRESHOLD
    offending = [(float(nu), int(m))
                 for nu, m in zip(spectrum.nus[bad], spectrum.mults[bad])]
    return WittReport(margin=margin, satisfied=margin > 0,
                      offending_modes=offending)


def circle_scalar_spectrum(beta: float, cutoff: int) -> CrossSectionSpectrum:
    """Scalar modes on the circle of circumference 2*pi*beta.

    nu_n = |n|/beta for integer |n| <= cutoff; multiplicity 1 for n = 0
    and 2 otherwise.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    n = np.arange(0, cutoff + 1)
    nus = n / beta
    mults = np.where(n == 0, 1, 2)
    return CrossSectionSpectrum(nus, mults, "analytic", 1,
                                {"kind": "circle", "beta": beta,
                                 "cutoff": int(cutoff)})


def scalar_a_shift(ell: int, f: int, normal_block: bool = False) -> float:
    """Square shift added to the cross-section Laplacian in the tangential
    operator on the cone over an f-dimensional link.

    The tangential block on degree-ell forms carries (ell-(f+1)/2)^2; the
    normal (dx wedge) block carries (ell-(f+3)/2)^2, selected by
    normal_block=True.
    """
    if not 0 <= ell <= f:
        raise ValueError("need 0 <= ell <= f")
    if normal_block:
        return (ell - (f + 3) / 2.0) ** 2
    return (ell - (f + 1) / 2.0) ** 2


_DOUBLE_BCS = ("dirichlet-double", "neumann-double")


def iterated_cone_spectrum(inner: CrossSectionSpectrum, bc: str, cutoff: float,
                           workers: int = 1,
                           scan_step: float = None) -> CrossSectionSpectrum:
    """Spectrum of the glued double of the truncated cone over `inner`.

    For each inner mode nu the radial matching condition at the gluing
    circle x = 1 determines eigenvalues mu:

    - odd modes ("dirichlet-double"):  J_nu(sqrt(mu)) = 0
    - even modes ("neumann-double"):   d/dx[sqrt(x) J_nu(sqrt(mu) x)]|_{x=1} = 0

    The outgoing entries are nu' = sqrt(mu + shift) with the scalar shift
    for a link of dimension inner.f_dim + 1; entries with nu' <= cutoff
    are returned, multiplicities propagated.
    """
    if bc not in _DOUBLE_BCS:
        raise ValueError(f"bc must be one of {_DOUBLE_BCS}")
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    shift = scalar_a_shift(0, inner.f_dim + 1)
    if cutoff ** 2 <= shift:
        raise ValueError("cutoff below the spectral shift; no modes")
    s_max = float(np.sqrt(cutoff ** 2 - shift))
    finder = bessel_j_zeros_upto if bc == "dirichlet-double" else robin_zeros_upto

    def roots_for(idx):
        nu_in = float(inner.nus[idx])
        roots = finder(nu_in, s_max) if scan_step is None \
            else finder(nu_in, s_max, step=scan_step)
        if len(roots) > 1 and np.any(np.diff(roots) <= 0):
            k = int(np.argmax(np.diff(roots) <= 0)) + 1
            raise RootFindError("non-monotone root sequence", nu=nu_in, k=k)
        return roots

    indices = range(len(inner))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            all_roots = list(ex.map(roots_for, indices))
    else:
        all_roots = [roots_for(i) for i in indices]

    nus_out, mults_out, order_key = [], [], []
    for i, roots in enumerate(all_roots):
        if len(roots) == 0:
            continue
        nus_out.append(np.sqrt(roots ** 2 + shift))
        mults_out.append(np.full(len(roots), inner.mults[i], dtype=np.int64))
        order_key.append(np.full(len(roots), i, dtype=np.int64))
    if not nus_out:
        raise ValueError("cutoff admits no modes")
    nus = np.concatenate(nus_out)
    mults = np.concatenate(mults_out)
    key2 = np.concatenate(order_key)
    # deterministic merge: sort by nu, ties broken by inner index
    order = np.lexsort((key2, nus))
    params = {"kind": "iterated-cone", "bc": bc, "cutoff": float(cutoff),
              "inner": dict(inner.params), "shift": shift}
    return CrossSectionSpectrum(nus[order], mults[order], "computed",
                                inner.f_dim + 1, params)


def weyl_slope(spectrum: CrossSectionSpectrum, top_fraction: float = 0.5):
    """Fitted growth order of the counting function N(nu) ~ C nu^s.

    Returns (slope, expected f_dim).  The fit uses the geometric top
    portion of the spectrum.
    """
    nus, N = spectrum.counting()
    lo = spectrum.nu_max * (1.0 - top_fraction)
    mask = nus > max(lo, nus[0] + 1e-9)
    if mask.sum() < 4:
        mask = nus > nus[len(nus) // 2]
    x = np.log(nus[mask])
    y = np.log(N[mask].astype(float))
    slope = np.polyfit(x, y, 1)[0]
    return float(slope), spectrum.f_dim


def density_fit(spectrum: CrossSectionSpectrum, top_fraction: float = 0.5):
    """Polynomial mode density rho(nu) = dN/dnu fitted on the top window.

    Returns ascending-power coefficients of a polynomial of degree
    f_dim - 1 (the derivative of a degree-f_dim fit of N).
    """
    nus, N = spectrum.counting()
    lo = spectrum.nu_max * (1.0 - top_fraction)
    mask = nus > lo
    deg = spectrum.f_dim
    coeffs = np.polynomial.polynomial.polyfit(nus[mask], N[mask].astype(float),
                                              deg)
    return np.polynomial.polynomial.polyder(coeffs)


# ----------------------------------------------------------------------
# persistence: one record per line "(nu mult source)", 17 significant
# digits, header with f_dim, builder parameters, content hash

_MAGIC = "# singtrace-spectrum v1"


def save_spectrum(spectrum: CrossSectionSpectrum, path) -> str:
    """Write the spectrum file; returns its content hash."""
    digest = spectrum.content_hash()
    lines = [_MAGIC,
             "# f_dim=%d" % spectrum.f_dim,
             "# source=%s" % spectrum.source,
             "# params=%s" % json.dumps(spectrum.params, sort_keys=True),
             "# sha256=%s" % digest]
    lines.extend(spectrum.record_lines())
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return digest


def load_spectrum(path, verify: bool = True) -> CrossSectionSpectrum:
    """Read a spectrum file; raises ValueError on hash mismatch."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != _MAGIC:
        raise ValueError(f"{path}: not a spectrum file")
    header = {}
    body_start = 0
    for i, line in enumerate(lines):
        if not line.startswith("#"):
            body_start = i
            break
        if "=" in line:
            key, _, val = line[1:].partition("=")
            header[key.strip()] = val
    nus, mults, sources = [], [], set()
    for line in lines[body_start:]:
        if not line.strip():
            continue
        nu_s, mult_s, src = line.split()
        nus.append(float(nu_s))
        mults.append(int(mult_s))
        sources.add(src)
    spec = CrossSectionSpectrum(np.array(nus), np.array(mults),
                                header.get("source", sources.pop()),
                                int(header["f_dim"]),
                                json.loads(header.get("params", "{}")))
    if verify and "sha256" in header:
        if spec.content_hash() != header["sha256"]:
            raise ValueError(f"{path}: content hash mismatch")
    return spec
