"""Machine-readable outputs: delimited samples, JSON reports, figures.

Every emitted number carries its route tag and tail/error bound; report
hashes are computed over the canonical payload (never over timestamps,
which are omitted from report bodies so reruns are byte-identical).
"""

from __future__ import annotations

import csv
import hashlib
import json
import os

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .conetrace import TraceSamples  # noqa: E402


def canonical_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=1)


def payload_hash(payload) -> str:
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()


def write_json(path, payload) -> str:
    digest = payload_hash(payload)
    body = {"sha256": digest, **payload}
    with open(path, "w") as fh:
        fh.write(canonical_json(body) + "\n")
    return digest


# -- TraceSamples CSV ----------------------------------------------------

def write_samples_csv(path, samples: TraceSamples, model_hash: str) -> str:
    """Header (model hash, route, m), rows (z, value, tail_bound)."""
    m = samples.meta.get("m", "")
    lines = [f"# model_hash={model_hash}",
             f"# route={samples.route}",
             f"# m={m}",
             f"# meta={json.dumps(samples.meta, sort_keys=True)}"]
    with open(path, "w", newline="") as fh:
        for line in lines:
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(["z", "value", "tail_bound"])
        for z, v, t in zip(samples.z_grid, samples.values,
                           samples.tail_bounds):
            writer.writerow(["%.17g" % z, "%.17g" % v, "%.17g" % t])
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def read_samples_csv(path) -> TraceSamples:
    header = {}
    rows = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                header[key] = val
                continue
            rows.append(line)
            break
        reader = csv.reader(rows + list(fh))
        next_rows = list(reader)
    body = [r for r in next_rows if r and r[0] != "z"]
    z = np.array([float(r[0]) for r in body])
    v = np.array([float(r[1]) for r in body])
    t = np.array([float(r[2]) for r in body])
    meta = json.loads(header.get("meta", "{}"))
    return TraceSamples(z, v, header.get("route", "kernel"), t, meta)


# -- figures -------------------------------------------------------------

def plot_samples(path, samples_by_route: dict, title: str):
    """Log-log trace curves per route, tail bounds as a shaded band."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for route, s in samples_by_route.items():
        ax.loglog(s.z_grid, s.values, marker="o", ms=3, lw=1.0, label=route)
        upper = s.values + s.tail_bounds
        lower = np.maximum(s.values - s.tail_bounds, 1e-300)
        ax.fill_between(s.z_grid, lower, upper, alpha=0.25, lw=0)
    ax.set_xlabel("z")
    ax.set_ylabel("trace")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_fit_residuals(path, samples: TraceSamples, fitted, title: str):
    """Relative residuals of the fitted expansion over the sample grid."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    model = fitted.evaluate(samples.z_grid)
    rel = np.abs(samples.values - model) / np.abs(samples.values)
    ax.loglog(samples.z_grid, np.maximum(rel, 1e-18), marker="s", ms=3,
              lw=1.0, label="|rel residual|")
    if np.any(samples.tail_bounds > 0):
        ax.loglog(samples.z_grid, samples.tail_bounds / samples.values,
                  ls="--", lw=1.0, label="tail bound (rel)")
    ax.set_xlabel("z")
    ax.set_ylabel("relative residual")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_residual_orders(path, z_grid, residuals_by_order: dict, title: str):
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for label, res in residuals_by_order.items():
        ax.loglog(z_grid, np.maximum(np.abs(res), 1e-22), lw=1.0,
                  label=label)
    ax.set_xlabel("z")
    ax.set_ylabel("|remainder|")
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
