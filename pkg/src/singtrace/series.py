"""Finite asymptotic series in z -> infinity: sums of coeff * z^power * log^logpow(z)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


def term_key(power: float, logpow: int):
    """Hashable key identifying a term; powers matched to 1e-9."""
    return (round(float(power), 9), int(logpow))


@dataclass
class ExpansionSeries:
    """Terms (power, logpow, coeff), sorted by descending power then
    ascending logpow; keys unique."""

    terms: list
    validity: tuple = (0.0, float("inf"))
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = {}
        for power, logpow, coeff in self.terms:
            key = term_key(power, logpow)
            merged[key] = merged.get(key, 0.0) + float(coeff)
        self.terms = [(p, l, merged[(p, l)])
                      for (p, l) in sorted(merged, key=lambda k: (-k[0], k[1]))]

    def coeff(self, power: float, logpow: int) -> float:
        key = term_key(power, logpow)
        for p, l, c in self.terms:
            if (p, l) == key:
                return c
        return 0.0

    def as_dict(self):
        return {key: c for *key, c in
                ((p, l, c) for p, l, c in self.terms)}

    def keys(self):
        return [(p, l) for p, l, _ in self.terms]

    def evaluate(self, z):
        z = np.asarray(z, dtype=float)
        out = np.zeros_like(z)
        lz = np.log(z)
        for p, l, c in self.terms:
            out = out + c * z ** p * lz ** l
        return out

    def truncate(self, n_terms: int) -> "ExpansionSeries":
        return ExpansionSeries(self.terms[:n_terms], self.validity,
                               dict(self.diagnostics))

    def scaled(self, factor: float) -> "ExpansionSeries":
        return ExpansionSeries([(p, l, factor * c) for p, l, c in self.terms],
                               self.validity, dict(self.diagnostics))

    def plus(self, other: "ExpansionSeries") -> "ExpansionSeries":
        return ExpansionSeries(self.terms + other.terms, self.validity)

    def grouped_by_power(self):
        """[(power, [(logpow, coeff), ...]), ...] in descending power."""
        groups = {}
        for p, l, c in self.terms:
            groups.setdefault(p, []).append((l, c))
        return sorted(groups.items(), key=lambda kv: -kv[0])

    # -- JSON round trip ---------------------------------------------------

    def to_json(self) -> str:
        payload = {
            "terms": [{"power": p, "logpow": l, "coeff": c}
                      for p, l, c in self.terms],
            "validity": list(self.validity),
            "diagnostics": self.diagnostics,
        }
        return json.dumps(payload, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ExpansionSeries":
        payload = json.loads(text)
        terms = [(t["power"], t["logpow"], t["coeff"])
                 for t in payload["terms"]]
        return cls(terms, tuple(payload.get("validity", (0, float("inf")))),
                   payload.get("diagnostics", {}))
