"""Resolvent traces of Laplace-type operators on model cones and edges.

Three independent computational routes — Bessel-kernel mode sums,
brute-force eigenvalue sums, and coefficient prediction from symbol
expansion data — are cross-checked against each other and against the
power/log structure of the large-parameter trace expansion.
"""

__version__ = "0.1.0"

from .bessel import (bessel_i, bessel_k, bessel_j_zero, baricz_ratio_bounds,
                     besseli_ratio)
from .olver import OlverFrame, olver_uniform, u_polynomials
from .spectra import (CrossSectionSpectrum, WittReport, circle_scalar_spectrum,
                      iterated_cone_spectrum, scalar_a_shift, witt_check)
from .conetrace import (ConeProblem, TraceSamples, cone_trace, mode_kernel,
                        mode_trace, mode_trace_eigensum, offdiag_decay_probe)
from .edgetrace import EdgeProblem, edge_trace, edge_expansion_shape
from .series import ExpansionSeries
from .sal import SymbolProvider, regularized_integral, sal_expand, verify_sal
from .fitting import FitBasis, fit_expansion, stability_probe, sal_vs_fit
from .weyl import weyl_coefficient

__all__ = [
    "bessel_i", "bessel_k", "bessel_j_zero", "baricz_ratio_bounds",
    "besseli_ratio", "OlverFrame", "olver_uniform", "u_polynomials",
    "CrossSectionSpectrum", "WittReport", "circle_scalar_spectrum",
    "iterated_cone_spectrum", "scalar_a_shift", "witt_check",
    "ConeProblem", "TraceSamples", "cone_trace", "mode_kernel", "mode_trace",
    "mode_trace_eigensum", "offdiag_decay_probe",
    "EdgeProblem", "edge_trace", "edge_expansion_shape",
    "ExpansionSeries", "SymbolProvider", "regularized_integral", "sal_expand",
    "verify_sal", "FitBasis", "fit_expansion", "stability_probe", "sal_vs_fit",
    "weyl_coefficient",
]
