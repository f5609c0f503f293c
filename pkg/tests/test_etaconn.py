import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

import oracles
from fields import FLAT2, KENMOTSU, SPHERE, matrix, points, scalar, vector
from solitonlab import catalog, etaconn as ec, geometry as geo
from solitonlab.jets import jeinsum
from solitonlab.report import DISCREPANT, FAIL, PASS

WITH_POTENTIAL = [n for n in catalog.names() if catalog.builtin(n).has_potential]


def _flat_xdy(x):
    return matrix(FLAT2, 2)(x), vector(["0", "x0"], 2)(x)


def test_eta_extra_slot_order():
    x = np.array([[0.5, 0.0]])
    g, eta = _flat_xdy(x)
    K = ec.eta_extra(g, eta, eta).value[0]
    # Gamma_x = [[0, x], [x, 0]], Gamma_y = [[x, 0], [0, 3x]] as matrices [k, j]
    assert_allclose(K[:, 0, :], [[0, 0.5], [0.5, 0]])
    assert_allclose(K[:, 1, :], [[0.5, 0], [0, 1.5]])


def test_ricci_xdy_hand_value(rng):
    x = points(rng, 20, [-2, -2], [2, 2])
    g, eta = _flat_xdy(x)
    ric = ec.ricci_of(ec.eta_gamma(g, eta)).value
    expected = np.stack([np.stack([2 * x[:, 0] ** 2, -3 + 0 * x[:, 0]], -1), np.stack([1 + 0 * x[:, 0], 2 * x[:, 0] ** 2], -1)], -2)
    assert_allclose(ric, expected, atol=1e-12)


def test_ricci_eta_against_sympy():
    # independent symbolic curvature of the sphere with eta = x1 dx0 + sin(x0) dx1
    xs = oracles.symbols(2)
    g = sp.Matrix([[1, 0], [0, sp.sin(xs[0]) ** 2]])
    eta = [xs[1], sp.sin(xs[0])]
    gi = g.inv()
    xi = [sum(gi[k, j] * eta[j] for j in range(2)) for k in range(2)]
    gam = oracles.christoffel(g, xs)
    gam = [[[gam[k][i][j] + eta[i] * int(k == j) + eta[j] * int(k == i) + g[i, j] * xi[k] for j in range(2)] for i in range(2)] for k in range(2)]
    ric = oracles.ricci(oracles.riemann(gam, xs), 2)
    pt = np.array([1.1, 0.4])
    x = pt[None]
    gj = matrix(SPHERE, 2)(x)
    ej = vector(["x1", "sin(x0)"], 2)(x)
    got = ec.ricci_of(ec.eta_gamma(gj, ej)).value[0]
    assert_allclose(got, oracles.evaluate(ric, xs, pt), atol=1e-12)


def test_ricci_eta_formula_xdy(rng):
    x = points(rng, 20, [-2, -2], [2, 2])
    g, eta = _flat_xdy(x)
    assert ec.ricci_eta_check(g, eta).max_residual <= 1e-12


@pytest.mark.parametrize("name", catalog.names())
def test_curvature_and_ricci_expansions(name):
    s = catalog.builtin(name)
    x = s.sample(50, 42)
    g, eta = s.metric_jet(x), s.eta_jet(x)
    assert ec.curvature_difference_check(g, eta).max_residual <= 1e-9
    assert ec.ricci_eta_check(g, eta).max_residual <= 1e-9
    rng = np.random.default_rng(7)
    for _ in range(2):
        e = catalog.compile_field(s, catalog.random_eta_exprs(s, rng))(x)
        assert ec.curvature_difference_check(g, e).max_residual <= 1e-9
        assert ec.ricci_eta_check(g, e).max_residual <= 1e-9


@pytest.mark.parametrize("name", WITH_POTENTIAL)
def test_df_relations(name):
    s = catalog.builtin(name)
    x = s.sample(50, 42)
    g, f = s.metric_jet(x), s.potential_jet(x)
    ft = catalog.compile_scalar(s, catalog.random_scalar_expr(s, np.random.default_rng(3)))(x)
    X = catalog.compile_field(s, catalog.random_eta_exprs(s, np.random.default_rng(4)))(x)
    for rep in (
        ec.ric_df_check(g, f),
        ec.hess_df_check(g, f),
        ec.div_relation_check(g, f, X),
        ec.laplace_relation_check(g, f, ft),
        ec.scal_relation_check(g, f),
        ec.hess_eta_relation_check(g, s.eta_jet(x), f),
    ):
        assert rep.verdict == PASS, (rep.check_id, rep.max_residual)


def test_pp_wave_walker_kernel():
    s = catalog.builtin("pp-wave-4")
    x = s.sample(50, 42)
    g, eta = s.metric_jet(x), s.eta_jet(x)
    gi = geo.inverse(g)
    xi = jeinsum("...ij,...j->...i", gi, eta)
    assert np.abs(geo.cov_deriv_vector(geo.christoffel(g, gi), xi).value).max() <= 1e-12
    assert np.abs(jeinsum("...i,...i->...", eta, xi).value).max() <= 1e-12
    assert np.nanmax(ec.ker_eta_residual(g, eta)) <= 1e-10
    assert np.abs(geo.riemann(geo.christoffel(g)).value).max() > 0.5


def test_ker_eta_nontrivial_elsewhere(rng):
    x = points(rng, 10, [-2, -2], [2, 2])
    g, eta = _flat_xdy(x)
    assert np.nanmax(ec.ker_eta_residual(g, eta)) > 0.1


def test_kenmotsu_example():
    s = catalog.builtin("kenmotsu-3")
    x = s.sample(30, 1)
    reps = ec.kenmotsu_checks(s.metric_jet(x), s.eta_jet(x), 1e-10)
    assert [r.verdict for r in reps] == [PASS] * 3


def test_kenmotsu_hessian(rng):
    x = points(rng, 10, [-1, -1, -1], [1, 1, 1])
    g = matrix(KENMOTSU, 3)(x)
    f = scalar("x0", 3)(x)
    gi = geo.inverse(g)
    hess = geo.hessian(geo.christoffel(g, gi), g, gi, f).value
    dt = np.zeros(3)
    dt[0] = 1
    assert_allclose(hess, g.value - np.outer(dt, dt), atol=1e-12)


def test_conjugate_ricci_closed_forms(rng):
    x = points(rng, 20, [-2, -2], [2, 2])
    g, eta = _flat_xdy(x)
    eq, tr = ec.conjugate_ricci_residuals(g, eta)
    assert eq.max() > 0.5
    rep = ec.conjugate_ricci_check(g, eta)
    assert rep.verdict == FAIL
    assert any("reproduced to" in d and float(d.split()[-1]) <= 1e-12 for d in rep.diagnostics)


def test_conjugate_ricci_xdy_equality_gap_at_x1():
    x = np.array([[1.0, 0.3]])
    g, eta = _flat_xdy(x)
    gi = geo.inverse(g)
    K = ec.eta_extra(g, eta, jeinsum("...ij,...j->...i", gi, eta))
    gam = geo.christoffel(g, gi)
    rp, rm = ec.ricci_of(gam + K).value[0], ec.ricci_of(gam - K).value[0]
    assert rp[0, 1] == pytest.approx(-3) and rm[0, 1] == pytest.approx(3)


def test_conjugate_ricci_holds_on_flat_parallel():
    s = catalog.builtin("flat-torus-2")
    x = s.sample(10, 0)
    rep = ec.conjugate_ricci_check(s.metric_jet(x), s.eta_jet(x))
    assert rep.verdict == PASS


@pytest.mark.parametrize("name", WITH_POTENTIAL)
def test_parallel_identity_and_geodesic(name):
    s = catalog.builtin(name)
    x = s.sample(30, 9)
    g, eta = s.metric_jet(x), s.eta_jet(x)
    left, right, _, _ = ec.nabla_eta_xi_identity(g, eta)
    assert np.abs(left.value - right.value).max() <= 1e-10 * max(1.0, np.abs(left.value).max())
    assert np.nanmax(ec.geodesic_condition_check(g, eta)) <= 1e-10
    assert ec.xi_parallel_soliton_check(g, eta).verdict in (PASS, DISCREPANT)


def test_gradlog_hypothesis():
    s = catalog.builtin("gradlog-2")
    x = s.sample(20, 2)
    g, eta = s.metric_jet(x), s.eta_jet(x)
    gi = geo.inverse(g)
    xi = jeinsum("...ij,...j->...i", gi, eta)
    A = geo.cov_deriv_vector(geo.christoffel(g, gi), xi).value
    assert_allclose(A, np.einsum("...j,...i->...ij", eta.value, xi.value), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_eta_data_invariants(c):
    x = np.array([[0.4, 1.2], [1.0, -0.3]])
    g = matrix(SPHERE, 2)(x)
    f = scalar(f"{c[0]}*x0 + {c[1]}*cos(x1) + {c[2]}*x0*x1 + {c[3]}", 2)(x)
    d = ec.EtaData.from_potential(geo.inverse(g), f)
    r1, r2 = d.invariant_residuals(g)
    assert r1.max() <= 1e-12 and r2.max() == 0
