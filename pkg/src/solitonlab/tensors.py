"""Pointwise dense tensors with declared index variance."""

from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .errors import AsymmetricMetric, DegenerateMetric, VarianceMismatch

UP, DOWN = "u", "l"


@dataclass(frozen=True)
class TensorAtPoint:
    components: np.ndarray
    variance: tuple
    point: tuple = ()

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "variance", tuple(self.variance))
        if comps.ndim != len(self.variance):
            raise VarianceMismatch(f"rank {comps.ndim} tensor given {len(self.variance)} variance slots")
        if any(v not in (UP, DOWN) for v in self.variance):
            raise VarianceMismatch(f"variance entries must be {UP!r} or {DOWN!r}")
        if comps.ndim and len(set(comps.shape)) != 1:
            raise VarianceMismatch(f"non-square component array {comps.shape}")

    @property
    def dim(self):
        return self.components.shape[0] if self.components.ndim else 0

    @property
    def rank(self):
        return self.components.ndim


def nondegeneracy_ok(g):
    g = np.asarray(g, dtype=float)
    n = g.shape[-1]
    scale = np.max(np.abs(g), axis=(-2, -1))
    return np.abs(np.linalg.det(g)) > 1e-12 * scale**n


@dataclass(frozen=True)
class MetricAtPoint:
    g: np.ndarray
    g_inv: np.ndarray
    det: float
    signature: tuple

    @classmethod
    def from_components(cls, g, point=()):
        g = np.asarray(g, dtype=float)
        scale = np.max(np.abs(g))
        if np.max(np.abs(g - g.T)) > 1e-12 * max(scale, 1e-300):
            raise AsymmetricMetric("metric components are not symmetric")
        if not nondegeneracy_ok(g):
            raise DegenerateMetric("metric is degenerate", point)
        eig = np.linalg.eigvalsh(g)
        sig = tuple(int(s) for s in np.sign(eig))
        return cls(g, np.linalg.inv(g), float(np.linalg.det(g)), sig)

    @property
    def dim(self):
        return self.g.shape[0]


def _letters(rank):
    return string.ascii_lowercase[:rank]


def lower(t, slot, metric):
    if t.variance[slot] != UP:
        raise VarianceMismatch(f"slot {slot} is already lower")
    return _move(t, slot, metric.g, DOWN)


def raise_(t, slot, metric):
    if t.variance[slot] != DOWN:
        raise VarianceMismatch(f"slot {slot} is already upper")
    return _move(t, slot, metric.g_inv, UP)


def _move(t, slot, m, new):
    idx = _letters(t.rank)
    out = idx.replace(idx[slot], "z")
    comps = np.einsum(f"z{idx[slot]},{idx}->{out}", m, t.components)
    var = list(t.variance)
    var[slot] = new
    return TensorAtPoint(comps, var, t.point)


def contract(t, slot_a, slot_b):
    va, vb = t.variance[slot_a], t.variance[slot_b]
    if va == vb:
        raise VarianceMismatch("contraction needs one upper and one lower slot")
    idx = list(_letters(t.rank))
    idx[slot_b] = idx[slot_a]
    keep = [c for k, c in enumerate(idx) if k not in (slot_a, slot_b)]
    comps = np.einsum(f"{''.join(idx)}->{''.join(keep)}", t.components)
    var = [v for k, v in enumerate(t.variance) if k not in (slot_a, slot_b)]
    return TensorAtPoint(comps, var, t.point)


def tensor_product(a, b):
    comps = np.multiply.outer(a.components, b.components)
    return TensorAtPoint(comps, a.variance + b.variance, a.point)


def inner_02(a, b, g_inv):
    """``g^{ik} g^{jl} A_ij B_kl``; works on batched arrays too."""
    a = a.components if isinstance(a, TensorAtPoint) else a
    b = b.components if isinstance(b, TensorAtPoint) else b
    g_inv = g_inv.g_inv if isinstance(g_inv, MetricAtPoint) else g_inv
    return np.einsum("...ik,...jl,...ij,...kl->...", g_inv, g_inv, a, b)


def norm2_02(a, g_inv):
    """Squared norm; may be negative in indefinite signature."""
    return inner_02(a, a, g_inv)


def vol_density(g):
    """``sqrt|det g|`` (batched)."""
    g = g.g if isinstance(g, MetricAtPoint) else np.asarray(g, dtype=float)
    if not np.all(nondegeneracy_ok(g)):
        raise DegenerateMetric("metric is degenerate")
    return np.sqrt(np.abs(np.linalg.det(g)))
