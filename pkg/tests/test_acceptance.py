"""Acceptance criteria 1-12, each at its stated tolerance.

Every test logs a PASS/FAIL line through the ``record`` fixture; the terminal
summary prints one line per criterion.  Criteria that do not hold as stated
are strict xfails: the assertion is the criterion verbatim, so an unexpected
pass turns the run red.
"""

import json
import time

import numpy as np
import pytest
from click.testing import CliRunner

from fields import FLAT2, matrix, points, vector
from solitonlab import catalog, cli, connections as cn, etaconn as ec, geometry as geo, integrate as ig, solitons as so
from solitonlab.jets import jeinsum
from solitonlab.report import PASS, residual
from solitonlab.suites import Sample, SuiteConfig

ALL = catalog.names()
WITH_F = [n for n in ALL if catalog.builtin(n).has_potential]
CFG = SuiteConfig("all", 50, 42, 1e-9, 64, "structured")


def sample(name, points=50):
    return Sample(catalog.builtin(name), SuiteConfig("all", points, 42, 1e-9, 64, "structured"))


def worst(values):
    return max(float(np.nanmax(v)) for v in values)


# 1 -----------------------------------------------------------------------------------


def test_criterion_1_statistical_suite(record):
    res = []
    for name in ALL:
        s = sample(name)
        for k in range(3):
            eta = s.random_eta(k)
            gam = ec.eta_gamma(s.g, eta, s.g_inv, s.gam)
            tors, dg, _ = cn.statistical_residuals(s.g, gam)
            dual = cn.dual_coefficients(s.g, s.g_inv, gam)
            minus = ec.eta_gamma(s.g, -eta, s.g_inv, s.gam)
            d = residual(dual - minus, dual.value, minus.value, nbatch=1)
            res.append((name, k, max(tors.max(), dg.max(), d.max())))
    m = max(r[2] for r in res)
    assert record(1, "torsion, d g, dual on all charts x 3 eta", m <= 1e-10, f"max={m:.2e} over {len(res)} draws")


# 2 -----------------------------------------------------------------------------------


def test_criterion_2_levi_civita(record):
    m = worst(cn.radial_identity_check(s.g, s.f).residuals for s in map(sample, WITH_F))
    s = sample("round-sphere-2")
    dH, rad, _ = cn.radial_identity_sides(s.g, s.gam, s.f)
    a = np.abs(dH.value).reshape(len(s.x), -1).max(-1)
    b = np.abs(rad.value).reshape(len(s.x), -1).max(-1)
    nonvac = float(np.median(np.minimum(a, b)))
    ok = m <= 1e-9 and nonvac > 0.1
    assert record(2, "levi-civita", ok, f"max={m:.2e}, sphere sides median={nonvac:.2f}")


@pytest.mark.xfail(strict=True, reason="stated eta-connection form drops (nabla g)-terms; see decisions ledger")
def test_criterion_2_eta_connection(record):
    stated, full = [], []
    for s in map(sample, WITH_F):
        gam = ec.eta_gamma(s.g, s.eta, s.g_inv, s.gam)
        rep = cn.radial_statistical_check(s.g, gam, s.f)
        stated.append(rep.residuals)
        full.append(rep.max_alt_residual)
    m = worst(stated)
    record(2, "eta-connection", m <= 1e-9, f"stated max={m:.2e}; full expansion max={max(full):.2e}")
    assert m <= 1e-9


# 3 -----------------------------------------------------------------------------------


def test_criterion_3_formula_harness(record):
    reps = []
    for name in WITH_F:
        s = sample(name)
        X = s.random_eta(0)
        ft = s.random_scalar(0)
        reps += [
            ec.ric_df_check(s.g, s.f),
            ec.hess_df_check(s.g, s.f),
            ec.div_relation_check(s.g, s.f, X),
            ec.laplace_relation_check(s.g, s.f, ft),
            ec.scal_relation_check(s.g, s.f),
        ]
    for name in ALL:
        s = sample(name)
        reps.append(ec.ricci_eta_check(s.g, s.eta))
    m = max(r.max_residual for r in reps)
    x = points(np.random.default_rng(42), 50, [-2, -2], [2, 2])
    g, eta = matrix(FLAT2, 2)(x), vector(["0", "x0"], 2)(x)
    ric = ec.ricci_of(ec.eta_gamma(g, eta)).value
    want = np.zeros_like(ric)
    want[:, 0, 0] = want[:, 1, 1] = 2 * x[:, 0] ** 2
    want[:, 0, 1], want[:, 1, 0] = -3, 1
    hand = float(np.abs(ric - want).max())
    ok = m <= 1e-9 and hand <= 1e-9
    assert record(3, "Ric^df, Hess^df, div, Laplace, scal, Ric^eta; x dy Ricci", ok, f"max={m:.2e}, x dy={hand:.2e}")


# 4 -----------------------------------------------------------------------------------


def test_criterion_4_curvature_difference(record):
    m = max(ec.curvature_difference_check(s.g, s.eta).max_residual for s in map(sample, ALL))
    s = sample("pp-wave-4")
    k = float(np.nanmax(ec.ker_eta_residual(s.g, s.eta)))
    ok = m <= 1e-9 and k <= 1e-10
    assert record(4, "difference formula; pp-wave ker eta", ok, f"max={m:.2e}, ker={k:.2e}")


# 5 -----------------------------------------------------------------------------------


def test_criterion_5_kenmotsu(record):
    s = sample("kenmotsu-3")
    reps = ec.kenmotsu_checks(s.g, s.eta, 1e-10)
    xi = jeinsum("...ij,...j->...i", s.g_inv, s.eta)
    J = ec.outer_endo(s.eta, xi) * -1.0
    gen = so.residual_general(ec.eta_gamma(s.g, s.eta), J, xi, s.lam)
    r_gen = float(np.abs(gen.value).max())
    m = max(r.max_residual for r in reps)
    ok = all(r.verdict == PASS for r in reps) and r_gen <= 1e-10
    assert record(5, "three Kenmotsu displays", ok, f"max={max(m, r_gen):.2e}")


# 6 -----------------------------------------------------------------------------------


@pytest.mark.xfail(strict=True, reason="conjugate Ricci symmetry fails in both readings; see decisions ledger")
def test_criterion_6_conjugate_ricci(record):
    transpose, eq_grad = [], []
    for name in ALL:
        s = sample(name)
        eq, tr = ec.conjugate_ricci_residuals(s.g, s.eta)
        transpose.append(tr)
        if s.spec.has_potential:
            eq_grad.append(eq)
    t, e = worst(transpose), worst(eq_grad)
    x = np.array([[1.0, 0.3]])
    g, eta = matrix(FLAT2, 2)(x), vector(["0", "x0"], 2)(x)
    K = ec.eta_extra(g, eta, eta)
    gam = geo.christoffel(g)
    gap = float(np.abs(ec.ricci_of(gam + K).value - ec.ricci_of(gam - K).value).max())
    ok = t <= 1e-10 and e <= 1e-10 and gap > 1
    record(6, "transpose everywhere, equality on gradients", ok, f"transpose={t:.2e}, equality(df)={e:.2e}, x dy gap={gap:.1f}")
    assert ok


# 7 -----------------------------------------------------------------------------------


def test_criterion_7_bochner(record):
    vals = []
    for s in map(sample, WITH_F):
        ric = geo.ricci(geo.riemann(s.gam))
        terms = geo.bochner_terms(s.g, s.g_inv, s.gam, ric, s.f)
        vals.append(residual(geo.bochner_residual(s.g, s.f, s.g_inv, s.gam, ric), *terms, nbatch=1))
    m = worst(vals)
    assert record(7, "Bochner formula", m <= 1e-9, f"max={m:.2e}")


# 8 -----------------------------------------------------------------------------------


def test_criterion_8_volume(record):
    cases = [("flat-torus-2", w) for w in ("prop_p", "prop_bochner_form", "zero_remark", "soliton_gdf")]
    cases += [("warped-torus-2", w) for w in ("prop_p", "zero_remark")]
    rel, conv = [], []
    for name, which in cases:
        s = catalog.builtin(name)
        lam = s.lambda_jet if s.lam is not None else None
        grid = s.grid(64)
        rel.append(ig.volume_formula_check(grid, s.metric_jet, s.potential_jet, which, lam).max_residual)
        conv.append(ig.convergence_check(grid, s.metric_jet, s.potential_jet, which, lam).max_residual)
    ok = max(rel) <= 1e-6 and max(conv) <= 1e-8
    assert record(8, "volume formulas at 64^2", ok, f"rel={max(rel):.2e}, convergence={max(conv):.2e}")


# 9 -----------------------------------------------------------------------------------


def test_criterion_9_bounds(record):
    violations = 0
    for form in ("gdf", "dfg"):
        g, hess, df, lam, ric = so.synthetic_bounds(form, 3, 1000, seed=42)
        violations += so.bounds_from_parts(form, np.linalg.inv(g), hess, df, ric).violations
    s = sample("round-sphere-2")
    zero = s.f * 0.0
    b = so.ricci_bounds(s.g, zero, zero + 1.0, "gdf")
    gap = float(np.abs(b.upper - b.ric_norm2).max())
    ok = violations == 0 and gap <= 1e-9
    assert record(9, "synthetic bounds, Einstein equality", ok, f"violations={violations}, gap={gap:.2e}")


# 10 ----------------------------------------------------------------------------------


def _transform_value(rep):
    corrected = [d for d in rep.diagnostics if d.startswith("corrected")]
    return float(corrected[0].split()[-1]) if corrected else rep.max_residual


def test_criterion_10_equivalences(record):
    worst_t, worst_i = 0.0, 0.0
    for name in ALL:
        s = sample(name, 20)
        for k in range(20):
            f, lam = s.random_scalar(k), s.random_lambda(k)
            for which in so.TRANSFORMS:
                worst_t = max(worst_t, _transform_value(so.equivalence_transforms(s.g, f, which, lam)))
            c = so.SolitonContext(s.g, f)
            for which in so.IFF_CHECKS:
                left, right, *_ = so.iff_sides(s.g, f, lam, which, c)
                worst_i = max(worst_i, float(np.max(cn.compare(left, right, 1))))
    s = sample("gradlog-2", 20)
    gl = [so.equivalence_transforms(s.g, s.f, w, s.lam) for w in ("eta_ii1", "eta_ii2")]
    gradlog = all(r.verdict == PASS and f"{len(s.x)}/{len(s.x)}" in r.diagnostics[0] for r in gl)
    s = sample("round-sphere-2", 20)
    sphere = all(so.statistical_iff_checks(s.g, s.f, s.lam, w).verdict == PASS for w in ("prop_e1", "prop_e2"))
    sphere &= "soliton holds at 20/20" in so.statistical_iff_checks(s.g, s.f, s.lam, "prop_e2").diagnostics[0]
    ok = worst_t <= 1e-9 and worst_i <= 1e-9 and gradlog and sphere
    detail = f"transforms={worst_t:.2e}, iff={worst_i:.2e}, gradlog={gradlog}, sphere={sphere}"
    assert record(10, "transform and iff identities, 20 draws per chart", ok, detail)


# 11 and 12 ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def full_runs():
    runner = CliRunner()
    args = ["check", "builtin:all", "--suite", "all", "--format", "structured"]
    out = []
    for _ in range(2):
        t0 = time.perf_counter()
        r = runner.invoke(cli.main, args)
        out.append((r, time.perf_counter() - t0))
    return out


def test_criterion_11_determinism(full_runs, record):
    (a, _), (b, _) = full_runs
    same = a.output.encode() == b.output.encode()
    lines = a.output.count("\n")
    assert record(11, "byte-identical structured reports", same and lines > 100, f"{lines} lines")


def test_criterion_12_runtime(full_runs, record):
    r, seconds = full_runs[0]
    summary = json.loads(r.output.splitlines()[-1])["summary"]
    ok = seconds < 300 and r.exit_code in (0, 1) and sum(summary.values()) > 100
    assert record(12, "check builtin:all --suite all", ok, f"{seconds:.1f}s, {summary}")
