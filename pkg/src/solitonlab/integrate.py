"""Quadrature on periodic charts and the volume-formula verifiers.

Compactness is realised by tori only.  A potential ``f`` enters every compact
formula through ``df`` and its derivatives, so ``f`` may be multivalued: it
is represented by a closed one-form whose jet is integrated symbolically
(the value slot is an arbitrary base value).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .errors import (
    NonconstantGradientNorm,
    SolitonHypothesisFailed,
    ThresholdViolation,
    ZeroGradient,
)
from .etaconn import eta_extra
from .jets import Jet, jeinsum, table
from .report import QUADRATURE_TOL, CheckReport
from .tensors import vol_density

FORMULAS = ("prop_p", "prop_bochner_form", "zero_remark", "soliton_gdf", "soliton_dfg", "remark_i", "remark_ii")

ANCHORS = {
    "prop_p": "Let $(M,g)$ be a compact",
    "prop_bochner_form": "the Bochner formula can be written",
    "zero_remark": "Notice that, under the same hypotheses",
    "soliton_gdf": "by applying $\\grad_g(f)$ to the previous",
    "soliton_dfg": "provided $\\lambda\\neq 3|\\grad_g(f)|^2_g$",
    "remark_i": "Under the same hypotheses, we have",
    "remark_ii": "Under the same hypotheses, we have",
}
ANCHOR_DIVERGENCE = "it follows from the divergence theorem"

CONSTANT_NORM_RTOL = 1e-8


@dataclass(frozen=True)
class PeriodicGrid:
    dim: int
    periods: tuple
    resolution: tuple

    def __post_init__(self):
        periods = tuple(float(p) for p in np.broadcast_to(self.periods, (self.dim,)))
        res = tuple(int(r) for r in np.broadcast_to(self.resolution, (self.dim,)))
        if any(r < 8 or r % 2 for r in res):
            raise ValueError(f"resolution must be even and >= 8, got {res}")
        if any(p <= 0 for p in periods):
            raise ValueError("periods must be positive")
        object.__setattr__(self, "periods", periods)
        object.__setattr__(self, "resolution", res)

    @property
    def nodes(self):
        axes = [np.arange(r) * (p / r) for p, r in zip(self.periods, self.resolution)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=-1)

    @property
    def cell(self):
        return float(np.prod([p / r for p, r in zip(self.periods, self.resolution)]))

    def refined(self, factor=2):
        return PeriodicGrid(self.dim, self.periods, tuple(r * factor for r in self.resolution))

    def coarsened(self, factor=2):
        return PeriodicGrid(self.dim, self.periods, tuple(r // factor for r in self.resolution))


def potential_from_oneform(eta):
    """Jet of a (local) potential ``f`` with ``df = eta``; ``f`` itself is 0 at the point.

    ``d^alpha f = d^beta eta_i`` with ``alpha = beta + e_i``; closedness of
    ``eta`` makes the choice of ``i`` irrelevant.
    """
    dim = eta.dim
    t = table(dim)
    c = np.zeros(eta.shape[:-1] + (t.ncoef,))
    for k, m in enumerate(t.multi):
        if not m:
            continue
        i, beta = m[0], m[1:]
        c[..., k] = eta.c[..., i, t.index[beta]]
    return Jet(c, dim, min(eta.order + 1, 3))


def closedness_residual(eta):
    """Per-point ``max |d_i eta_j - d_j eta_i|`` (at the value level)."""
    d = eta.grad().value  # [j, i] = d_i eta_j
    a = np.abs(d - np.swapaxes(d, -1, -2))
    return a.reshape(a.shape[:-2] + (-1,)).max(axis=-1)


@dataclass
class ClosedOneFormPotential:
    """A closed one-form ``eta`` standing in for ``df`` on a torus."""

    eta_fn: object  # x -> Jet (..., dim)
    dim: int

    def eta(self, x):
        return self.eta_fn(x)

    def potential(self, x):
        return potential_from_oneform(self.eta(x))

    def closedness(self, x):
        return float(np.max(closedness_residual(self.eta(x))))

    def periods(self, grid):
        """Mean of each ``eta_i`` over the grid: the harmonic (cohomology) part."""
        e = self.eta(grid.nodes).value
        return e.mean(axis=0)

    def single_valued(self, grid, tol=1e-10):
        return bool(np.all(np.abs(self.periods(grid)) < tol))


def integrate_scalar(grid, g_fn, field):
    """Trapezoidal rule for ``int field dmu_g`` on the torus ``grid``.

    ``field`` is an array of node values or a callable ``x -> array``.
    """
    x = grid.nodes
    g = g_fn(x)
    gv = g.value if isinstance(g, Jet) else np.asarray(g)
    vals = field(x) if callable(field) else np.asarray(field, dtype=float)
    if isinstance(vals, Jet):
        vals = vals.value
    return float(np.sum(vals * vol_density(gv)) * grid.cell)


def volume(grid, g_fn):
    return integrate_scalar(grid, g_fn, np.ones(grid.nodes.shape[0]))


class _GridFields:
    """Jets of every quantity the volume formulas need, at all grid nodes."""

    def __init__(self, grid, g_fn, f_fn, lam_fn=None):
        x = grid.nodes
        self.grid = grid
        self.g = g_fn(x)
        self.n = grid.dim
        self.f = f_fn(x)
        self.g_inv = geo.inverse(self.g)
        self.gam = geo.christoffel(self.g, self.g_inv)
        self.ric = geo.ricci(geo.riemann(self.gam))
        self.scal = geo.scalar(self.g_inv, self.ric)
        self.df = self.f.grad()
        self.xi = jeinsum("...ij,...j->...i", self.g_inv, self.df)
        self.xi2 = jeinsum("...i,...i->...", self.df, self.xi)
        self.hess = geo.hessian(self.gam, self.g, self.g_inv, self.f)
        self.lap = geo.laplacian(self.gam, self.g_inv, self.f)
        self.lam = lam_fn(x) if lam_fn is not None else None
        self.density = vol_density(self.g.value)

    def integral(self, vals):
        v = vals.value if isinstance(vals, Jet) else vals
        return float(np.sum(v * self.density) * self.grid.cell)

    def along_xi(self, s):
        return jeinsum("...i,...i->...", self.xi, s.grad()).value

    def norm2(self, h):
        return geo.inner_02(h, h, self.g_inv).value

    def at_xi(self, h):
        return jeinsum("...i,...i->...", jeinsum("...ij,...j->...i", h, self.xi), self.xi).value

    @property
    def gam_df(self):
        return self.gam + eta_extra(self.g, self.df, self.xi)

    def ric_df(self):
        return geo.ricci(geo.riemann(self.gam_df))


def gradient_norm(fields):
    """Constant ``|grad f|^2`` or raise the matching precondition error."""
    v = fields.xi2.value
    m = float(np.mean(v))
    spread = float(np.max(np.abs(v - m)))
    if spread > CONSTANT_NORM_RTOL * max(1.0, abs(m)):
        raise NonconstantGradientNorm(f"|grad f|^2 varies by {spread:.3e} on the grid")
    if abs(m) < 1e-12:
        raise ZeroGradient("|grad f|^2 vanishes")
    return m


def _soliton_residual(fields, form):
    g = fields.g
    lam = fields.lam
    if lam is None:
        raise SolitonHypothesisFailed("no lambda supplied for a soliton formula")
    lg = jeinsum("...ij,...->...ij", g, lam)
    if form == "gdf":
        res = fields.hess + fields.ric_df() - lg
    else:
        dd = jeinsum("...i,...j->...ij", fields.df, fields.df)
        res = fields.hess + jeinsum("...ij,...->...ij", g, fields.xi2) + dd * 2.0 + fields.ric - lg
    r = np.abs(res.value).max()
    return r / max(1.0, np.abs(fields.hess.value).max(), np.abs(lg.value).max())


def volume_rhs(fields, which, soliton_tol=1e-9):
    """Right-hand side of the named volume formula (the left is ``vol``).

    ``zero_remark`` returns the integral that should vanish.
    """
    if which not in FORMULAS:
        raise ValueError(f"unknown formula {which!r}; expected one of {FORMULAS}")
    n = fields.n
    if n < 2:
        raise ValueError("volume formulas need n >= 2")
    x2 = gradient_norm(fields)
    I = fields.integral
    h2 = I(fields.norm2(fields.hess))
    xi_lap = I(fields.along_xi(fields.lap))
    if which == "prop_p":
        return (h2 + xi_lap + I(fields.at_xi(fields.ric_df()))) / (2 * (n - 1) * x2**2)
    if which == "prop_bochner_form":
        dd = jeinsum("...i,...j->...ij", fields.df, fields.df)
        hess_df = fields.hess + jeinsum("...ij,...->...ij", fields.g, fields.xi2) + dd * 2.0
        lap_df = fields.lap + fields.xi2 * float(n + 2)
        total = I(fields.norm2(hess_df)) + I(fields.along_xi(lap_df)) + I(fields.at_xi(fields.ric_df()))
        return total / (3 * (n + 2) * x2**2)
    if which == "zero_remark":
        return h2 + xi_lap + I(fields.at_xi(fields.ric))
    form = "dfg" if which == "soliton_dfg" else "gdf"
    r = _soliton_residual(fields, form)
    if r > soliton_tol:
        raise SolitonHypothesisFailed(f"{form} soliton residual {r:.3e} on the grid", residual=r)
    lam = fields.lam
    xi_scal = I(fields.along_xi(fields.scal))
    if which == "soliton_gdf":
        return (h2 + x2 * I(lam.value) + n * I(fields.along_xi(lam)) - xi_scal) / (2 * (n - 1) * x2**2)
    if which == "soliton_dfg":
        lam_c = _constant_lambda(lam)
        den = (lam_c - 3 * x2) * x2
        if abs(den) < 1e-12:
            raise ThresholdViolation("lambda equals 3|grad f|^2")
        return (-h2 + xi_scal) / den
    threshold = 2 * (n - 1) * x2
    if which == "remark_i":
        if n < 3:
            raise ThresholdViolation("remark_i needs n >= 3")
        lam_c = _constant_lambda(lam)
        if abs(lam_c - threshold) > 1e-9 * max(1.0, abs(threshold)):
            raise ThresholdViolation(f"remark_i needs lambda = 2(n-1)|grad f|^2 = {threshold}")
        return I(fields.scal.value) / ((n - 1) * (n - 2) * x2)
    if which == "remark_ii":
        lam_c = _constant_lambda(lam)
        if abs(lam_c - threshold) < 1e-9 * max(1.0, abs(threshold)):
            raise ThresholdViolation(f"remark_ii needs lambda != 2(n-1)|grad f|^2 = {threshold}")
        return (h2 - xi_scal) / ((threshold - lam_c) * x2)


def _constant_lambda(lam):
    v = lam.value
    if np.max(np.abs(v - v.mean())) > 1e-9 * max(1.0, abs(v.mean())):
        raise ThresholdViolation("formula needs a constant lambda")
    return float(v.mean())


def volume_formula_check(grid, g_fn, f_fn, which, lam_fn=None, tol=QUADRATURE_TOL):
    """Compare the named formula with ``vol`` (relative residual).

    Precondition failures raise the documented exceptions; callers map them
    to SKIPPED.
    """
    fields = _GridFields(grid, g_fn, f_fn, lam_fn)
    vol = fields.integral(np.ones_like(fields.density))
    rhs = volume_rhs(fields, which)
    if which == "zero_remark":
        rel = abs(rhs) / vol
    else:
        rel = abs(rhs - vol) / abs(vol)
    rep = CheckReport(f"volume-{which}", ANCHORS[which], np.array([rel]), tol)
    rep.note(f"vol={vol:.12g} rhs={rhs:.12g}")
    rep.data.update(vol=vol, rhs=rhs)
    return rep


def convergence_check(grid, g_fn, f_fn, which, lam_fn=None, tol=1e-8):
    """Relative change of the formula value when the mesh is halved."""
    fine = volume_rhs(_GridFields(grid, g_fn, f_fn, lam_fn), which)
    coarse = volume_rhs(_GridFields(grid.coarsened(), g_fn, f_fn, lam_fn), which)
    scale = volume(grid, g_fn) if which == "zero_remark" else max(abs(fine), 1e-300)
    rel = abs(fine - coarse) / scale
    rep = CheckReport(f"convergence-{which}", ANCHORS[which], np.array([rel]), tol)
    rep.note(f"fine={fine:.15g} coarse={coarse:.15g}")
    return rep


def divergence_theorem_check(grid, g_fn, f_fn, X_fn):
    """``int div^{df} X dmu - (n+2) int g(grad f, X) dmu`` (should vanish)."""
    x = grid.nodes
    fields = _GridFields(grid, g_fn, f_fn)
    X = X_fn(x)
    div_df = geo.divergence(fields.gam_df, X)
    lhs = fields.integral(div_df)
    rhs = (fields.n + 2) * fields.integral(jeinsum("...i,...i->...", fields.df, X))
    return lhs - rhs


def divergence_volume(grid, g_fn, f_fn):
    """``vol = int div^{df}(grad f) dmu / ((n+2)|grad f|^2)`` for constant ``|grad f|``."""
    fields = _GridFields(grid, g_fn, f_fn)
    x2 = gradient_norm(fields)
    return fields.integral(geo.divergence(fields.gam_df, fields.xi)) / ((fields.n + 2) * x2)
