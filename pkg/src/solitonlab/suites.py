"""Named check suites over a manifold spec, in a fixed registry order."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import catalog, connections as cn, etaconn as ec, geometry as geo, integrate as ig, solitons as so
from .errors import (
    DegenerateMetric,
    NonCompactManifold,
    NonconstantGradientNorm,
    SolitonHypothesisFailed,
    ThresholdViolation,
    ZeroGradient,
)
from .jets import jeinsum
from .report import DEFAULT_TOL, CheckReport, compare, residual, skipped

SUITES = ("statistical", "connections", "etaconn", "solitons", "bounds", "volume")
PRECONDITION_ERRORS = (
    SolitonHypothesisFailed,
    NonconstantGradientNorm,
    ZeroGradient,
    ThresholdViolation,
    NonCompactManifold,
    DegenerateMetric,
)
RANDOM_ETAS = 3
SYNTHETIC_DRAWS = 1000


@dataclass(frozen=True)
class SuiteConfig:
    suite: str = "all"
    points: int = 50
    seed: int = 42
    tol: float = DEFAULT_TOL
    grid: int = 64
    format: str = "text"

    def __post_init__(self):
        if self.suite != "all" and self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; expected one of {SUITES + ('all',)}")
        if self.points < 1:
            raise ValueError("points must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.grid < 8 or self.grid % 2:
            raise ValueError("grid must be even and >= 8")
        if self.format not in ("text", "structured"):
            raise ValueError("format must be text or structured")


class Sample:
    """Field jets of one spec at its seeded, nondegenerate sample points."""

    def __init__(self, spec, cfg):
        self.spec = spec
        self.cfg = cfg
        x = spec.sample(cfg.points, cfg.seed)
        ok = spec.nondegenerate_mask(x)
        self.dropped = int(np.sum(~ok))
        self.x = x[ok]
        self.g = spec.metric_jet(self.x)
        self.f = spec.potential_jet(self.x)
        self.eta = spec.eta_jet(self.x)
        self.lam = spec.lambda_jet(self.x)
        self.J = spec.J_jet(self.x)
        self.g_inv = geo.inverse(self.g)
        self.gam = geo.christoffel(self.g, self.g_inv)

    def rng(self, *stream):
        return np.random.default_rng([self.cfg.seed, *stream])

    def random_eta(self, k):
        exprs = catalog.random_eta_exprs(self.spec, self.rng(1, k))
        return catalog.compile_field(self.spec, exprs)(self.x)

    def random_scalar(self, k):
        expr = catalog.random_scalar_expr(self.spec, self.rng(2, k))
        return catalog.compile_scalar(self.spec, expr)(self.x)

    def random_lambda(self, k):
        return self.random_scalar(100 + k)


def _need_f(s, check_id, anchor):
    if s.f is None:
        return skipped(check_id, anchor, "spec declares no potential f or closed one-form")
    return None


# statistical ------------------------------------------------------------------------


def suite_statistical(s):
    tol = s.cfg.tol
    out = [cn.is_statistical(s.g, s.gam, tol, "statistical-levi-civita")]
    etas = [("declared", s.eta)] if s.eta is not None else []
    etas += [(f"random-{k}", s.random_eta(k)) for k in range(RANDOM_ETAS)]
    for tag, eta in etas:
        gp, gm = ec.eta_gamma(s.g, eta, s.g_inv, s.gam), ec.eta_gamma(s.g, -eta, s.g_inv, s.gam)
        out.append(cn.is_statistical(s.g, gp, tol, f"statistical-eta-{tag}"))
        d = cn.duality_check(s.g, gp, gm, tol)
        d.check_id = f"dual-eta-{tag}"
        out.append(d)
    if s.f is None:
        out.append(_need_f(s, "statistical-hess-g", cn.ANCHOR_RADIAL))
    else:
        hess = geo.hessian(s.gam, s.g, s.g_inv, s.f)
        rep = cn.is_statistical(hess, s.gam, tol, "statistical-hess-g")
        rep.anchor = cn.ANCHOR_RADIAL
        rad = geo.radial_curvature(geo.riemann(s.gam), s.g, geo.gradient(s.g_inv, s.f))
        rep.note(f"max radial curvature {np.abs(rad.value).max():.3e}")
        out.append(rep)
    return out


# connections ------------------------------------------------------------------------


def suite_connections(s):
    tol = s.cfg.tol
    nb = s.g.ndim - 2
    out = []
    eta = s.eta if s.eta is not None else s.random_eta(0)
    gam_eta = ec.eta_gamma(s.g, eta, s.g_inv, s.gam)
    dual = cn.dual_coefficients(s.g, s.g_inv, gam_eta)
    back = cn.dual_coefficients(s.g, s.g_inv, dual)
    out.append(CheckReport("dual-involution", cn.ANCHOR_DUAL, compare(back, gam_eta, nb), tol))
    out.append(cn.is_nearly_statistical(s.g, gam_eta, tol))
    out.append(cn.is_quasi_statistical(s.g, gam_eta, tol))
    # curvature commutation on a statistical connection
    V = s.random_eta(1)
    V = jeinsum("...ij,...j->...i", s.g_inv, V)
    s2 = geo.second_cov_deriv_vec(gam_eta, V)  # [i, j, k]
    comm = s2 - s2.transpose(geo._perm(s2, (1, 0, 2)))
    RV = jeinsum("...kmij,...m->...ijk", geo.riemann(gam_eta), V)
    out.append(CheckReport("curvature-commutation", cn.ANCHOR_STATISTICAL, compare(comm, RV, nb), tol))
    if s.f is None:
        for cid, anchor in (
            ("radial-identity-g", cn.ANCHOR_RADIAL),
            ("radial-identity-stat", cn.ANCHOR_RADIAL_STAT),
            ("equiaffine-df", cn.ANCHOR_EQUIAFFINE),
        ):
            out.append(_need_f(s, cid, anchor))
    else:
        out.append(cn.radial_identity_check(s.g, s.f, tol))
        out.append(cn.radial_statistical_check(s.g, gam_eta, s.f, tol))
        df = s.f.grad()
        gam_df = ec.eta_gamma(s.g, df, s.g_inv, s.gam)
        rep = cn.is_equiaffine(gam_df, tol, "equiaffine-df")
        out.append(rep)
    # equiaffine(nabla^eta) <=> nabla^g xi self-adjoint
    xi = jeinsum("...ij,...j->...i", s.g_inv, eta)
    A = geo.cov_deriv_vector(s.gam, xi)
    ric_eta = ec.ricci_of(gam_eta)
    asym = residual(cn.ricci_asymmetry(ric_eta), ric_eta.value, nbatch=nb)
    sa = cn.self_adjoint_check(s.g, A)
    # Ric^eta(Y,Z) - Ric^eta(Z,Y) = (n+2)[g(Y, A Z) - g(A Y, Z)] -> normalised residuals agree on zero sets
    gA = geo.lower_endo(s.g, A).value
    skew = gA - np.swapaxes(gA, -1, -2)
    n = s.spec.dim
    r = compare(cn.ricci_asymmetry(ric_eta), -(n + 2) * skew, nb)
    rep = CheckReport("equiaffine-self-adjoint", cn.ANCHOR_EQUIAFFINE, r, tol)
    rep.note(f"Ricci asymmetry {asym.max():.3e}; self-adjoint defect {sa.max():.3e}")
    out.append(rep)
    # Codazzi lemma with the declared J, else J = nabla^g xi
    J = s.J if s.J is not None else A
    out.append(cn.omega_codazzi_lemma_check(J, s.g, s.gam, tol))
    pid = CheckReport("codazzi-killing-split", cn.ANCHOR_KILLING, cn.codazzi_killing_parallel_identity(J, s.g, s.gam), tol)
    pid.note(f"codazzi defect {cn.codazzi_check(J, s.g, s.gam).max():.3e}; killing defect {cn.killing_check(J, s.g, s.gam).max():.3e}")
    out.append(pid)
    # Koszul differences when the tensor is nondegenerate
    ric = geo.ricci(geo.riemann(s.gam))
    if np.all(geo.nondegeneracy_ok(ric.value)) and np.abs(ric.value).max() > 1e-8:
        left, right = geo.koszul_ricci_sides(s.g, s.g_inv, s.gam, ric)
        out.append(CheckReport("koszul-ricci", cn.ANCHOR_STATISTICAL, compare(left, right, nb), tol))
    else:
        out.append(skipped("koszul-ricci", cn.ANCHOR_STATISTICAL, "Ricci tensor degenerate at some sample point"))
    if s.f is not None:
        hess = geo.hessian(s.gam, s.g, s.g_inv, s.f)
        if np.all(geo.nondegeneracy_ok(hess.value)) and np.abs(hess.value).max() > 1e-8:
            left, right = geo.koszul_hessian_sides(s.g, s.g_inv, s.gam, s.f)
            out.append(CheckReport("koszul-hessian", cn.ANCHOR_RADIAL, compare(left, right, nb), tol))
        else:
            out.append(skipped("koszul-hessian", cn.ANCHOR_RADIAL, "Hessian degenerate at some sample point"))
        b = geo.bochner_residual(s.g, s.f, s.g_inv, s.gam, ric)
        terms = geo.bochner_terms(s.g, s.g_inv, s.gam, ric, s.f)
        out.append(CheckReport("bochner", ig.ANCHORS["prop_bochner_form"], residual(b[..., None], *[t[..., None] for t in terms]), tol))
    else:
        out.append(_need_f(s, "koszul-hessian", cn.ANCHOR_RADIAL))
        out.append(_need_f(s, "bochner", ig.ANCHORS["prop_bochner_form"]))
    return out


# eta connection ----------------------------------------------------------------------


def _null_parallel(s, eta):
    xi = jeinsum("...ij,...j->...i", s.g_inv, eta)
    A = geo.cov_deriv_vector(s.gam, xi).value
    n2 = np.einsum("...i,...i->...", xi.value, eta.value)
    return np.abs(A).max() < 1e-12 and np.abs(n2).max() < 1e-12


def suite_etaconn(s):
    tol = s.cfg.tol
    out = []
    eta = s.eta if s.eta is not None else s.random_eta(0)
    out.append(ec.curvature_difference_check(s.g, eta, tol))
    if _null_parallel(s, eta):
        out.append(CheckReport("ker-eta", ec.ANCHOR_WALKER, ec.ker_eta_residual(s.g, eta), tol))
    else:
        out.append(skipped("ker-eta", ec.ANCHOR_WALKER, "xi is not a null parallel field"))
    out.append(ec.ricci_eta_check(s.g, eta, tol))
    out.append(ec.conjugate_ricci_check(s.g, eta, tol))
    out.append(ec.xi_parallel_soliton_check(s.g, eta, tol))
    geo_r = ec.geodesic_condition_check(s.g, eta)
    out.append(CheckReport("geodesic-condition", ec.ANCHOR_GEODESIC, geo_r, tol))
    if s.f is None:
        for cid, anchor in (
            ("ric-df", ec.ANCHOR_RIC_DF),
            ("hess-df", ec.ANCHOR_HESS_DF),
            ("div-relation", ec.ANCHOR_DIV),
            ("laplace-relation", ec.ANCHOR_LAPLACE),
            ("scal-relation", ec.ANCHOR_SCAL),
            ("hess-eta", ec.ANCHOR_HESS_ETA),
        ):
            out.append(_need_f(s, cid, anchor))
    else:
        out.append(ec.ric_df_check(s.g, s.f, tol))
        out.append(ec.hess_df_check(s.g, s.f, tol))
        X = jeinsum("...ij,...j->...i", s.g_inv, s.random_eta(2))
        out.append(ec.div_relation_check(s.g, s.f, X, tol))
        out.append(ec.laplace_relation_check(s.g, s.f, s.random_scalar(0), tol))
        out.append(ec.scal_relation_check(s.g, s.f, tol))
        out.append(ec.hess_eta_relation_check(s.g, eta, s.f, tol))
    ken = ec.kenmotsu_checks(s.g, eta, tol)
    if ken[0].passed:
        out.extend(ken)
    else:
        for r in ken:
            out.append(skipped(r.check_id, r.anchor, f"data is not Kenmotsu (nabla^g xi = I - eta(x)xi fails by {ken[0].max_residual:.3e})"))
    return out


# solitons ------------------------------------------------------------------------------


def _soliton_membership(s, tol):
    out = []
    ctx = so.SolitonContext(s.g, s.f)
    for kind, (fn, anchor) in so.RESIDUALS.items():
        r = residual(fn(s.g, s.f, s.lam, ctx), ctx.hess.value, ctx.ric.value, s.g.value, nbatch=ctx.nb)
        cid = f"gradient-almost-{kind}"
        if r.max() < tol:
            rep = CheckReport(cid, anchor, r, tol)
            rep.note(f"lambda constancy defect {so.lambda_constancy_residual(s.lam).max():.3e}")
            out.append(rep)
        else:
            out.append(skipped(cid, anchor, f"declared (f, lambda) is not of this kind (residual {r.max():.3e})"))
    return out


def suite_solitons(s):
    tol = s.cfg.tol
    if s.f is None:
        return [_need_f(s, "solitons", so.ANCHOR_RICCI)]
    out = _soliton_membership(s, tol)
    if s.J is not None:
        xi = jeinsum("...ij,...j->...i", s.g_inv, s.eta if s.eta is not None else s.f.grad())
        gam = ec.eta_gamma(s.g, s.eta, s.g_inv, s.gam) if s.eta is not None else s.gam
        res = so.residual_general(gam, s.J, xi, s.lam)
        out.append(CheckReport("general-soliton", so.ANCHOR_GENERAL, residual(res, s.J.value, nbatch=s.g.ndim - 2), tol))
    draws = [("declared", s.f, s.lam), ("random", s.f + s.random_scalar(1) * 0.5, s.random_lambda(0))]
    for tag, f, lam in draws:
        for w in so.TRANSFORMS:
            rep = so.equivalence_transforms(s.g, f, w, lam, tol)
            rep.check_id += f"-{tag}"
            out.append(rep)
        for w in so.IFF_CHECKS:
            rep = so.statistical_iff_checks(s.g, f, lam, w, tol)
            rep.check_id += f"-{tag}"
            out.append(rep)
    ctx = so.SolitonContext(s.g, s.f)
    J = s.J if s.J is not None else ctx.eye(s.lam) - ctx.A
    out.append(so.nearly_statistical_omega_check(s.g, ctx.gam_eta, J, ctx.xi, s.lam, tol))
    out.append(so.omega_equivalence_check(s.g, s.f, J, s.lam, tol))
    out.append(so.omega_symmetric_lemma_check(s.g, ctx.gam_eta, J, ctx.xi, s.lam, tol))
    return out


# bounds ----------------------------------------------------------------------------------


def suite_bounds(s):
    tol = s.cfg.tol
    n = s.spec.dim
    out = []
    for k, form in enumerate(("gdf", "dfg")):
        g, hess, df, lam, ric = so.synthetic_bounds(form, n, SYNTHETIC_DRAWS, seed=s.cfg.seed + k)
        b = so.bounds_from_parts(form, np.linalg.inv(g), hess, df, ric)
        v = np.zeros(SYNTHETIC_DRAWS)
        slack = 1e-9 * np.maximum(1.0, np.abs(b.ric_norm2))
        v = np.maximum(np.maximum(b.lower - b.ric_norm2 - slack, b.ric_norm2 - b.upper - slack), 0.0)
        rep = CheckReport(f"bounds-synthetic-{form}", so.ANCHOR_BOUNDS, v / np.maximum(1.0, np.abs(b.upper)), tol)
        rep.note(f"{b.violations} violations in {SYNTHETIC_DRAWS} draws")
        out.append(rep)
        gap = so.bounds_gap_identity(form, np.linalg.inv(g), hess, df, ric, lam)
        out.append(CheckReport(f"bounds-gap-{form}", so.ANCHOR_BOUNDS, np.abs(gap) / np.maximum(1.0, np.abs(b.upper)), tol))
        # Einstein f = 0 instance reaches the upper bound
        g0 = np.broadcast_to(np.eye(n), (1, n, n))
        z = np.zeros((1, n, n))
        ric0 = so.soliton_ricci_from(form, g0, z, np.zeros((1, n)), np.array([float(n)]))
        b0 = so.bounds_from_parts(form, g0, z, np.zeros((1, n)), ric0)
        out.append(CheckReport(f"bounds-einstein-{form}", so.ANCHOR_BOUNDS, np.abs(b0.upper - b0.ric_norm2) / max(1.0, abs(b0.upper[0])), tol))
        if s.f is None:
            out.append(_need_f(s, f"bounds-manifold-{form}", so.ANCHOR_BOUNDS))
            out.append(_need_f(s, f"trace-identity-{form}", so.ANCHOR_TRACE))
            continue
        try:
            mb = so.ricci_bounds(s.g, s.f, s.lam, form, tol)
            r = np.maximum(np.maximum(mb.lower - mb.ric_norm2, mb.ric_norm2 - mb.upper), 0.0)
            out.append(CheckReport(f"bounds-manifold-{form}", so.ANCHOR_BOUNDS, r / np.maximum(1.0, np.abs(mb.upper)), tol))
            t = so.soliton_trace_identity(s.g, s.f, s.lam, form, tol)
            out.append(CheckReport(f"trace-identity-{form}", so.ANCHOR_TRACE, np.abs(t), tol))
        except SolitonHypothesisFailed as exc:
            out.append(skipped(f"bounds-manifold-{form}", so.ANCHOR_BOUNDS, str(exc)))
            out.append(skipped(f"trace-identity-{form}", so.ANCHOR_TRACE, str(exc)))
    g_inv, hess, df, ric, lam = so.synthetic_unit_gradient(n, SYNTHETIC_DRAWS, seed=s.cfg.seed)
    a, b = so.unit_gradient_residuals(g_inv, hess, df, ric, lam)
    out.append(CheckReport("unit-gradient", so.ANCHOR_UNIT, np.maximum(np.abs(a), np.abs(b)) / np.maximum(1.0, np.abs(lam) * n), tol))
    return out


# volume ----------------------------------------------------------------------------------


def suite_volume(spec, cfg):
    out = []
    if not spec.compact:
        return [skipped("volume", ig.ANCHOR_DIVERGENCE, f"{spec.name} is not compact")]
    if not spec.has_potential:
        return [skipped("volume", ig.ANCHOR_DIVERGENCE, "spec declares no potential f or closed one-form")]
    res = cfg.grid if spec.dim == 2 else max(8, min(cfg.grid, 16))
    grid = spec.grid(res)
    lam_fn = spec.lambda_jet if spec.lam is not None else None
    for which in ig.FORMULAS:
        try:
            out.append(volume_check(spec, which, grid, lam_fn))
            out.append(ig.convergence_check(grid, spec.metric_jet, spec.potential_jet, which, lam_fn))
        except PRECONDITION_ERRORS as exc:
            out.append(skipped(f"volume-{which}", ig.ANCHORS[which], f"{type(exc).__name__}: {exc}"))
    try:
        d = ig.divergence_volume(grid, spec.metric_jet, spec.potential_jet)
        vol = ig.volume(grid, spec.metric_jet)
        out.append(CheckReport("volume-divergence", ig.ANCHOR_DIVERGENCE, np.array([abs(d - vol) / vol]), 1e-6))
    except PRECONDITION_ERRORS as exc:
        out.append(skipped("volume-divergence", ig.ANCHOR_DIVERGENCE, f"{type(exc).__name__}: {exc}"))
    return out


def volume_check(spec, which, grid, lam_fn=None, tol=1e-6):
    return ig.volume_formula_check(grid, spec.metric_jet, spec.potential_jet, which, lam_fn, tol)


_POINTWISE = {
    "statistical": suite_statistical,
    "connections": suite_connections,
    "etaconn": suite_etaconn,
    "solitons": suite_solitons,
    "bounds": suite_bounds,
}


def run(spec, cfg):
    """All reports of ``cfg.suite`` on ``spec``, in registry order."""
    names = SUITES if cfg.suite == "all" else (cfg.suite,)
    sample = None
    out = []
    for name in names:
        if name == "volume":
            out.extend(suite_volume(spec, cfg))
            continue
        if sample is None:
            sample = Sample(spec, cfg)
        if sample.x.shape[0] == 0:
            out.append(skipped(name, "", "no nondegenerate sample points"))
            continue
        for rep in _POINTWISE[name](sample):
            rep.skipped += sample.dropped
            out.append(rep)
    return out
