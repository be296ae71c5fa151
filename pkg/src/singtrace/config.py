"""Experiment configuration: one structured JSON document, no implicit
defaults for the physically meaningful fields (m, beta, b must be given)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import ConfigError

_KINDS = ("cone", "edge", "iterated-cone")


@dataclass
class ModelSpec:
    kind: str
    beta: float
    m: int
    b: int = 0
    L: float = 0.0
    bc: str = "dirichlet"
    nu_cutoff: float = 400.0
    inner_cutoff: int = 0        # iterated-cone: circle mode count

    @property
    def cone_dim(self) -> int:
        return 3 if self.kind == "iterated-cone" else 2

    @property
    def dim(self) -> int:
        return self.cone_dim + (self.b if self.kind == "edge" else 0)

    @property
    def depth(self) -> int:
        return 2 if self.kind == "iterated-cone" else 1

    @property
    def strata(self):
        """(dim Y, depth of Y) for each singular stratum."""
        if self.kind == "cone":
            return [(0, 1)]
        if self.kind == "edge":
            return [(self.b, 1)]
        # cone over the glued double: radial lines over the inner cone
        # points (dim 1, depth 1) and the tip (dim 0, depth 2)
        return [(1, 1), (0, 2)]

    @property
    def volume(self) -> float:
        half_cross = math.pi * self.beta          # truncated-cone area
        if self.kind == "cone":
            return half_cross
        if self.kind == "edge":
            return self.L ** self.b * half_cross
        return half_cross / 3.0                   # cone over the half family


@dataclass
class ZGridSpec:
    min: float
    max: float
    count: int
    spacing: str = "log"


@dataclass
class FitSpec:
    window: tuple
    max_power_order: int
    max_log_order: int
    samples_per_coeff: int = 3
    cond_limit: float = 1e9
    drift_threshold: float = 0.05
    subwindows: int = 2


@dataclass
class ExperimentConfig:
    model: ModelSpec
    z_grid: ZGridSpec
    fit: FitSpec
    routes: list
    workers: int = 1
    cache_dir: str = None
    output_dir: str = "."
    weyl_rel_tol: float = 0.02
    route_agreement_tol: float = 1e-6
    label: str = "experiment"

    def canonical(self) -> dict:
        """Dict over which report hashes are computed (no paths)."""
        return {
            "model": vars(self.model),
            "z_grid": vars(self.z_grid),
            "fit": {**vars(self.fit), "window": list(self.fit.window)},
            "routes": list(self.routes),
            "label": self.label,
        }


def _need(doc: dict, key: str, where: str):
    if key not in doc:
        raise ConfigError(f"{where}: missing required field '{key}'")
    return doc[key]


def parse_config(doc: dict) -> ExperimentConfig:
    mdoc = _need(doc, "model", "config")
    kind = _need(mdoc, "kind", "model")
    if kind not in _KINDS:
        raise ConfigError(f"model.kind: must be one of {_KINDS}, got {kind!r}")
    beta = _need(mdoc, "beta", "model")
    m = _need(mdoc, "m", "model")
    if not isinstance(m, int) or m < 1:
        raise ConfigError("model.m: must be a positive integer")
    if not (isinstance(beta, (int, float)) and beta > 0):
        raise ConfigError("model.beta: must be positive")
    b = 0
    L = 0.0
    if kind == "edge":
        b = _need(mdoc, "b", "model")
        L = _need(mdoc, "L", "model")
        if not isinstance(b, int) or b < 1:
            raise ConfigError("model.b: must be a positive integer for edges")
        if not (isinstance(L, (int, float)) and L > 0):
            raise ConfigError("model.L: must be positive")
    bc = mdoc.get("bc", "dirichlet")
    if kind == "iterated-cone" and bc not in ("dirichlet-double",
                                              "neumann-double"):
        raise ConfigError("model.bc: iterated-cone requires dirichlet-double "
                          "or neumann-double")
    model = ModelSpec(kind=kind, beta=float(beta), m=m, b=b, L=float(L),
                      bc=bc, nu_cutoff=float(mdoc.get("nu_cutoff", 400.0)),
                      inner_cutoff=int(mdoc.get("inner_cutoff", 0)))
    if 2 * model.m <= model.dim:
        raise ConfigError(
            f"model.m: trace-class violation, 2m = {2*model.m} <= dim = "
            f"{model.dim}")

    gdoc = _need(doc, "z_grid", "config")
    grid = ZGridSpec(min=float(_need(gdoc, "min", "z_grid")),
                     max=float(_need(gdoc, "max", "z_grid")),
                     count=int(_need(gdoc, "count", "z_grid")),
                     spacing=gdoc.get("spacing", "log"))
    if grid.spacing != "log":
        raise ConfigError("z_grid.spacing: only 'log' is supported")
    if not (0 < grid.min < grid.max) or grid.count < 4:
        raise ConfigError("z_grid: need 0 < min < max and count >= 4")

    fdoc = _need(doc, "fit", "config")
    fit = FitSpec(window=tuple(fdoc.get("window", (grid.min, grid.max))),
                  max_power_order=int(_need(fdoc, "max_power_order", "fit")),
                  max_log_order=int(_need(fdoc, "max_log_order", "fit")),
                  samples_per_coeff=int(fdoc.get("samples_per_coeff", 3)),
                  cond_limit=float(fdoc.get("cond_limit", 1e9)),
                  drift_threshold=float(fdoc.get("drift_threshold", 0.05)),
                  subwindows=int(fdoc.get("subwindows", 2)))
    if fit.max_log_order > model.depth:
        raise ConfigError(
            f"fit.max_log_order: log^{fit.max_log_order} terms exceed the "
            f"model's stratification depth {model.depth}")
    if fit.max_log_order < 0 or fit.max_power_order < 1:
        raise ConfigError("fit: orders must be non-negative")

    routes = doc.get("routes", ["kernel"])
    return ExperimentConfig(
        model=model, z_grid=grid, fit=fit, routes=list(routes),
        workers=int(doc.get("workers", 1)),
        cache_dir=doc.get("cache_dir"),
        output_dir=doc.get("output_dir", "."),
        weyl_rel_tol=float(doc.get("weyl_rel_tol", 0.02)),
        route_agreement_tol=float(doc.get("route_agreement_tol", 1e-6)),
        label=doc.get("label", "experiment"))


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return parse_config(doc)
