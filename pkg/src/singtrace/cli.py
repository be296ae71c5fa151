"""Batch front end.

Subcommands:

  run <config.json>           build the model, sample traces per route,
                              fit the expansion, emit reports and figures
  verify-sal <config.json>    expansion-engine self check on a named symbol
  dump-special <config.json>  CSV tables of Bessel values and zeros

Exit codes: 0 all verifications pass, 1 a hard verification failed,
2 configuration error.  The cache root honours SINGTRACE_CACHE unless the
config overrides it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, weyl
from .cache import CacheStore, params_key
from .config import ExperimentConfig, load_config
from .conetrace import ConeProblem, ConeTraceEngine
from .edgetrace import EdgeProblem, EdgeTraceEngine
from .errors import ConfigError, SingtraceError
from .fitting import fit_expansion, stability_probe, theorem_basis
from .reports import (ensure_dir, payload_hash, plot_fit_residuals,
                      plot_residual_orders, plot_samples, write_json,
                      write_samples_csv)
from .sal import sal_expand, substituted_integral, verify_sal
from .spectra import (CrossSectionSpectrum, circle_scalar_spectrum,
                      iterated_cone_spectrum, save_spectrum, witt_check)
from .symbols import make_symbol


def _cache_for(config: ExperimentConfig) -> CacheStore:
    root = config.cache_dir or os.environ.get("SINGTRACE_CACHE")
    return CacheStore(root)


def build_spectrum(config: ExperimentConfig, cache: CacheStore,
                   cutoff_scale: float = 1.0) -> CrossSectionSpectrum:
    model = config.model
    cutoff = model.nu_cutoff * cutoff_scale
    if model.kind in ("cone", "edge"):
        n_max = int(np.floor(model.beta * cutoff))
        return circle_scalar_spectrum(model.beta, max(n_max, 1))
    inner_count = model.inner_cutoff or int(np.ceil(model.beta * cutoff))
    params = {"kind": "iterated-cone", "bc": model.bc,
              "beta": model.beta, "cutoff": cutoff,
              "inner_count": inner_count}
    hit = cache.get(params)
    if hit is not None:
        return CrossSectionSpectrum(hit["nus"], hit["mults"], "computed",
                                    int(hit["f_dim"][0]), params)
    # prefix reuse: a stored spectrum with identical parameters except a
    # larger cutoff restricts to this one
    for stored in cache.scan_params():
        same = all(stored.get(k) == params[k]
                   for k in ("kind", "bc", "beta"))
        if same and stored.get("cutoff", 0) >= cutoff and \
                stored.get("inner_count", 0) >= inner_count:
            arrays = cache.get(stored)
            if arrays is None:
                continue
            full = CrossSectionSpectrum(arrays["nus"], arrays["mults"],
                                        "computed", int(arrays["f_dim"][0]),
                                        stored)
            spec = full.truncated(cutoff)
            spec.params.update(params)
            return spec
    inner = circle_scalar_spectrum(model.beta, inner_count)
    spec = iterated_cone_spectrum(inner, model.bc, cutoff,
                                  workers=config.workers)
    cache.put(params, {"nus": spec.nus, "mults": spec.mults,
                       "f_dim": np.array([spec.f_dim])})
    return spec


def _z_grid(config: ExperimentConfig) -> np.ndarray:
    g = config.z_grid
    return np.geomspace(g.min, g.max, g.count)


def _engines(config: ExperimentConfig, spectrum: CrossSectionSpectrum):
    model = config.model
    cone = ConeProblem(spectrum, m=model.m)
    if model.kind == "edge":
        edge = EdgeProblem(cone, b=model.b, L=model.L)
        return {"lattice": EdgeTraceEngine(edge, workers=config.workers)}
    engine = ConeTraceEngine(cone, workers=config.workers)
    return {route: engine for route in config.routes}


def run_experiment(config: ExperimentConfig) -> dict:
    """Full pipeline; returns the verdicts payload (also written to disk)."""
    out = ensure_dir(config.output_dir)
    cache = _cache_for(config)
    model = config.model
    spectrum = build_spectrum(config, cache)
    witt = witt_check(spectrum)
    model_hash = payload_hash(config.canonical())

    spec_path = os.path.join(out, f"{config.label}.spectrum.txt")
    spectrum_hash = save_spectrum(spectrum, spec_path)

    z = _z_grid(config)
    engines = _engines(config, spectrum)
    samples_by_route = {}
    csv_hashes = {}
    for route, engine in engines.items():
        if isinstance(engine, EdgeTraceEngine):
            samples = engine.samples(z)
        else:
            samples = engine.samples(z, route=route)
        samples_by_route[route] = samples
        path = os.path.join(out, f"{config.label}.samples.{route}.csv")
        csv_hashes[route] = write_samples_csv(path, samples, model_hash)

    primary = samples_by_route.get("kernel") or samples_by_route.get(
        "lattice") or next(iter(samples_by_route.values()))

    # route agreement (hard verification)
    agreement = {}
    routes = list(samples_by_route)
    for i in range(len(routes)):
        for j in range(i + 1, len(routes)):
            a = samples_by_route[routes[i]]
            b = samples_by_route[routes[j]]
            rel = np.max(np.abs(a.values - b.values)
                         / np.abs(a.values))
            agreement[f"{routes[i]}|{routes[j]}"] = {
                "max_rel_diff": float(rel),
                "tol": config.route_agreement_tol,
                "ok": bool(rel <= config.route_agreement_tol
                           + np.max((a.tail_bounds + b.tail_bounds)
                                    / np.abs(a.values))),
            }

    # expansion fit on the theorem basis
    basis = theorem_basis(model.dim, model.m, model.strata,
                          config.fit.max_power_order,
                          config.fit.max_log_order,
                          config.fit.window,
                          config.fit.samples_per_coeff)
    fitted = fit_expansion(primary, basis)
    drift = stability_probe(primary, basis,
                            n_subwindows=config.fit.subwindows,
                            drift_threshold=config.fit.drift_threshold)

    # Weyl anchor (hard verification)
    lead_power = model.dim - 2 * model.m
    expected = weyl.weyl_coefficient(model.dim, model.m, model.volume)
    got = fitted.coeff(lead_power, 0)
    weyl_rel = abs(got - expected) / abs(expected)
    weyl_ok = weyl_rel <= config.weyl_rel_tol

    series_path = os.path.join(out, f"{config.label}.expansion.json")
    with open(series_path, "w") as fh:
        fh.write(fitted.to_json() + "\n")

    payload = {
        "tool_version": __version__,
        "label": config.label,
        "model_hash": model_hash,
        "spectrum": {"path": os.path.basename(spec_path),
                     "sha256": spectrum_hash,
                     "n_modes": len(spectrum),
                     "nu_max": spectrum.nu_max},
        "witt": witt.as_dict,
        "samples": {route: {"path": os.path.basename(
            os.path.join(out, f"{config.label}.samples.{route}.csv")),
            "sha256": csv_hashes[route],
            "route": route,
            "max_tail_bound_rel": float(np.max(
                samples_by_route[route].tail_bounds
                / samples_by_route[route].values))}
            for route in samples_by_route},
        "route_agreement": agreement,
        "fit": {"terms": [{"power": p, "logpow": l, "coeff": c}
                          for p, l, c in fitted.terms],
                "diagnostics": fitted.diagnostics},
        "stability": drift,
        "weyl": {"power": lead_power, "expected": expected,
                 "fitted": got, "rel_diff": float(weyl_rel),
                 "tol": config.weyl_rel_tol, "ok": bool(weyl_ok)},
    }
    hard_ok = bool(weyl_ok and all(v["ok"] for v in agreement.values()))
    payload["verdict"] = {"pass": hard_ok}

    write_json(os.path.join(out, f"{config.label}.report.json"), payload)
    plot_samples(os.path.join(out, f"{config.label}.samples.png"),
                 samples_by_route, f"{config.label}: trace samples")
    plot_fit_residuals(os.path.join(out, f"{config.label}.residuals.png"),
                       primary, fitted, f"{config.label}: fit residuals")
    return payload


def cmd_run(args) -> int:
    config = load_config(args.config)
    if args.workers is not None:
        config.workers = args.workers
    payload = run_experiment(config)
    print(json.dumps(payload["verdict"]))
    return 0 if payload["verdict"]["pass"] else 1


def cmd_verify_sal(args) -> int:
    with open(args.config) as fh:
        doc = json.load(fh)
    sdoc = doc.get("symbol")
    if not isinstance(sdoc, dict) or "name" not in sdoc:
        raise ConfigError("symbol: need an object with a 'name' field")
    params = {k: v for k, v in sdoc.items() if k != "name"}
    symbol = make_symbol(sdoc["name"], **params)
    orders = doc.get("orders", {})
    k_max = int(orders.get("k_max", 3))
    alpha_min = float(orders.get("alpha_min", -8.0))
    gdoc = doc.get("z_grid", {})
    z = np.geomspace(float(gdoc.get("min", 20.0)),
                     float(gdoc.get("max", 2000.0)),
                     int(gdoc.get("count", 13)))
    out = ensure_dir(doc.get("output_dir", "."))
    series = sal_expand(symbol, k_max, alpha_min)
    report = verify_sal(symbol, k_max, alpha_min, z_grid=z, series=series,
                        slope_tol=float(doc.get("slope_tol", 0.2)))
    label = doc.get("label", symbol.name.replace("(", "_").replace(")", ""))
    payload = {"symbol": symbol.name, "series": json.loads(series.to_json()),
               "verification": report}
    write_json(os.path.join(out, f"{label}.sal.json"), payload)

    direct = np.array([substituted_integral(symbol, zz) for zz in z])
    partial = np.zeros_like(direct)
    residuals = {}
    for power, logterms in series.grouped_by_power():
        for l, c in logterms:
            partial = partial + c * z ** power * np.log(z) ** l
        residuals[f"after z^{power:g}"] = direct - partial
    plot_residual_orders(os.path.join(out, f"{label}.sal.png"), z, residuals,
                         f"{symbol.name}: remainder per order")
    print(json.dumps({"all_ok": report["all_ok"]}))
    return 0 if report["all_ok"] else 1


def cmd_dump_special(args) -> int:
    from .bessel import bessel_i, bessel_k, bessel_j_zero
    with open(args.config) as fh:
        doc = json.load(fh)
    out = ensure_dir(doc.get("output_dir", "."))
    label = doc.get("label", "special")
    rows = []
    nus = doc.get("nu", [0.5, 1.0, 2.0])
    xs = doc.get("x", [0.5, 1.0, 2.0, 5.0])
    for nu in nus:
        for x in xs:
            rows.append((nu, x, bessel_i(nu, x, scaled=True),
                         bessel_k(nu, x, scaled=True)))
    path = os.path.join(out, f"{label}.csv")
    with open(path, "w") as fh:
        fh.write("nu,x,i_scaled,k_scaled\n")
        for r in rows:
            fh.write(",".join("%.17g" % v for v in r) + "\n")
    zdoc = doc.get("zeros")
    if zdoc:
        zpath = os.path.join(out, f"{label}.zeros.csv")
        with open(zpath, "w") as fh:
            fh.write("nu,k,zero\n")
            for nu in zdoc.get("nu", [0.0]):
                for k in range(1, int(zdoc.get("count", 10)) + 1):
                    fh.write("%.17g,%d,%.17g\n"
                             % (nu, k, bessel_j_zero(nu, k)))
    print(path)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="singtrace",
        description="Resolvent-trace experiments on model cones and edges")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--workers", type=int, default=None,
                       help="override the config's parallelism degree")
    p_run.set_defaults(func=cmd_run)

    p_sal = sub.add_parser("verify-sal", help="expansion-engine self check")
    p_sal.add_argument("config")
    p_sal.set_defaults(func=cmd_verify_sal)

    p_dump = sub.add_parser("dump-special", help="dump special-function tables")
    p_dump.add_argument("config")
    p_dump.set_defaults(func=cmd_dump_special)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SingtraceError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
