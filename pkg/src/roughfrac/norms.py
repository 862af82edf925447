"""Strong, weak and weighted Lebesgue functionals on grid functions.

All integrals are cell sums: a :class:`SampledFunction` is treated as the
piecewise-constant function equal to its cell-center value on each cell, so
level sets and weak quasinorms are exact on the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import NonFiniteWeight

__all__ = [
    "NormSpec",
    "lp_norm",
    "weak_lp_quasinorm",
    "weighted_norm",
    "weighted_weak_quasinorm",
]

KINDS = ("strong", "weak", "weighted_multiplier", "weighted_measure")


@dataclass(frozen=True)
class NormSpec:
    """Which functional to apply.

    ``weighted_multiplier`` is ``(int |f w|^p)^(1/p)``; ``weighted_measure``
    is ``(int |f|^p w)^(1/p)``.
    """

    kind: str
    p: float
    w: object = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if not self.p >= 1:
            raise ValueError("p must be >= 1")
        if (self.w is not None) != self.kind.startswith("weighted"):
            raise ValueError("a weight is required exactly for the weighted kinds")

    def __call__(self, f):
        if self.kind == "strong":
            return lp_norm(f, self.p)
        if self.kind == "weak":
            return weak_lp_quasinorm(f, self.p)
        return weighted_norm(f, self)


def _check_p(p):
    if not p >= 1:
        raise ValueError("p must be >= 1")


def lp_norm(f, p):
    """``(sum |f|^p h^n)^(1/p)``; ``p = inf`` gives the maximum of ``|f|``."""
    _check_p(p)
    a = np.abs(f.values).ravel()
    if math.isinf(p):
        return float(a.max(initial=0.0))
    top = float(a.max(initial=0.0))
    if top == 0.0:
        return 0.0
    # scale by the maximum so tiny or huge values do not under/overflow
    return top * float(np.sum((a / top) ** p) * f.cell_volume) ** (1.0 / p)


def _weak_from_masses(a, masses, p):
    order = np.argsort(-a, kind="stable")
    a = a[order]
    mass = np.cumsum(masses[order])
    keep = a > 0
    if not np.any(keep):
        return 0.0
    return float(np.max(a[keep] * mass[keep] ** (1.0 / p)))


def weak_lp_quasinorm(f, p):
    """``sup_lambda lambda |{|f| > lambda}|^(1/p)``, exact over grid cells."""
    _check_p(p)
    a = np.abs(f.values).ravel()
    return _weak_from_masses(a, np.full(a.shape, f.cell_volume), p)


def _weight_on_cells(w, f):
    centers = f.cell_centers()
    vals = np.asarray(w.evaluate(centers) if hasattr(w, "evaluate") else w(centers), dtype=float)
    vals = vals.reshape(-1)
    support = np.abs(f.values).ravel() > 0
    if not np.all(np.isfinite(vals[support])):
        bad = centers[support & ~np.isfinite(vals)][0]
        raise NonFiniteWeight(f"weight is not finite at cell center {bad.tolist()}")
    return np.where(support, vals, 0.0)


def weighted_norm(f, spec):
    """Weighted norm of ``f`` in the convention chosen by ``spec.kind``."""
    if spec.kind not in ("weighted_multiplier", "weighted_measure"):
        raise ValueError("spec must be a weighted kind")
    p = spec.p
    a = np.abs(f.values).ravel()
    w = _weight_on_cells(spec.w, f)
    if spec.kind == "weighted_multiplier":
        if math.isinf(p):
            return float(np.max(a * w, initial=0.0))
        return float(np.sum((a * w) ** p) * f.cell_volume) ** (1.0 / p)
    if math.isinf(p):
        return float(np.max(a, initial=0.0))
    return float(np.sum(a**p * w) * f.cell_volume) ** (1.0 / p)


def weighted_weak_quasinorm(f, p, u):
    """``sup_lambda lambda u({|f| > lambda})^(1/p)`` with ``u``-mass per cell."""
    _check_p(p)
    a = np.abs(f.values).ravel()
    masses = _weight_on_cells(u, f) * f.cell_volume
    return _weak_from_masses(a, masses, p)
