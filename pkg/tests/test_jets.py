import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from solitonlab import exprlang, jets
from solitonlab.errors import DomainError, JetDivisionByZero
from solitonlab.jets import Jet, jeinsum, jet_variable, jinv

from oracles import fd_partial, partials, to_sympy


def coeffs(j):
    t = jets.table(j.dim)
    return {m: float(j.c[..., t.index[m]]) for m in t.multi}


def test_seed_jet():
    x = jet_variable(0, (3.0, 1.0), 2)
    c = coeffs(x)
    assert c[()] == 3 and c[(0,)] == 1
    assert all(v == 0 for m, v in c.items() if m not in ((), (0,)))
    y = jet_variable(1, (0.0, 0.0), 2)
    assert coeffs(y)[(1,)] == 1 and coeffs(y)[()] == 0


def test_seed_out_of_range():
    with pytest.raises(IndexError):
        jet_variable(2, (0.0, 0.0), 2)


def test_square_of_variable(backend):
    x = jet_variable(0, (3.0,), 1)
    c = coeffs(x * x)
    assert (c[()], c[(0,)], c[(0, 0)], c[(0, 0, 0)]) == (9, 6, 2, 0)


def test_sin_taylor(backend):
    s = jets.sin(jet_variable(0, (0.0,), 1))
    c = coeffs(s)
    assert_allclose([c[()], c[(0,)], c[(0, 0)], c[(0, 0, 0)]], [0, 1, 0, -1], atol=1e-15)


def test_constant_propagation():
    e = jets.exp(Jet.constant(0.7, 2))
    assert coeffs(e)[()] == pytest.approx(math.exp(0.7))
    assert np.all(e.c[1:] == 0)


def test_table_sizes():
    for dim in range(1, 9):
        assert jets.table(dim).ncoef == math.comb(dim + 3, 3)
    with pytest.raises(ValueError):
        jets.table(9)


def test_domain_errors():
    x = jet_variable(0, (-1.0,), 1)
    with pytest.raises(DomainError):
        jets.log(x)
    with pytest.raises(DomainError):
        jets.sqrt(x)
    with pytest.raises(JetDivisionByZero):
        jet_variable(0, (1.0,), 1) / jet_variable(0, (0.0,), 1)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-2, 2), min_size=4, max_size=4),
    st.lists(st.floats(-2, 2), min_size=4, max_size=4),
    st.floats(-1.5, 1.5),
)
def test_univariate_leibniz_third_derivative(p, q, x0):
    x = jet_variable(0, (x0,), 1)
    f = sum((x**k) * p[k] for k in range(1, 4)) + p[0]
    g = sum((x**k) * q[k] for k in range(1, 4)) + q[0]
    fd = [np.polyval(np.polyder(p[::-1], k), x0) if k else np.polyval(p[::-1], x0) for k in range(4)]
    gd = [np.polyval(np.polyder(q[::-1], k), x0) if k else np.polyval(q[::-1], x0) for k in range(4)]
    expect = sum(math.comb(3, k) * fd[k] * gd[3 - k] for k in range(4))
    assert_allclose(coeffs(f * g)[(0, 0, 0)], expect, rtol=1e-12, atol=1e-12)


def test_product_against_finite_differences(backend):
    fn = lambda y: np.sin(y[0]) * np.exp(0.3 * y[1]) / (2 + np.cos(y[0] * y[1]))
    x0 = np.array([0.4, -0.7])
    xs = jets.coordinate_jets(x0)
    j = jets.sin(xs[0]) * jets.exp(xs[1] * 0.3) / (jets.cos(xs[0] * xs[1]) + 2.0)
    for m, v in coeffs(j).items():
        assert_allclose(v, fd_partial(fn, x0, m), rtol=1e-5, atol=1e-6)


_LEAVES = ["x0", "x1", "x2", "0.5", "1.3"]
_UNARY = ["sin", "cos", "exp", "tanh", "sinh", "cosh"]


@st.composite
def expr_trees(draw, depth=4):
    if depth == 0 or draw(st.integers(0, 3)) == 0:
        return draw(st.sampled_from(_LEAVES))
    kind = draw(st.sampled_from(["+", "-", "*", "/", "f", "sq"]))
    a = draw(expr_trees(depth=depth - 1))
    if kind == "f":
        return f"{draw(st.sampled_from(_UNARY))}({a})"
    if kind == "sq":
        return f"({a})^2"
    b = draw(expr_trees(depth=depth - 1))
    if kind == "/":
        return f"({a})/(2 + sin({b}))"
    return f"({a}) {kind} ({b})"


@settings(max_examples=25, deadline=None)
@given(expr_trees(depth=6), st.lists(st.floats(-0.8, 0.8), min_size=3, max_size=3))
def test_random_trees_match_symbolic_partials(text, point):
    node = exprlang.compile_expr(text, 3)
    j = exprlang.eval_jet(node, np.array(point))
    expr, xs = to_sympy(text, 3)
    ref = partials(expr, xs, point)
    got = coeffs(j)
    for m in ref:
        assert_allclose(got[m], ref[m], rtol=1e-9, atol=1e-9 * max(1.0, abs(ref[m])))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_polynomial_coefficients_exact(v):
    x = jets.coordinate_jets(np.array(v[:2]))
    p = x[0] * x[0] * x[1] * v[2] + x[1] * v[3] + v[4]
    c = coeffs(p)
    assert c[(0, 0, 1)] == pytest.approx(2 * v[2], abs=1e-14)
    assert c[(0, 1)] == pytest.approx(2 * v[0] * v[2], rel=1e-14, abs=1e-14)
    assert c[(1, 1)] == 0 and c[(1, 1, 1)] == 0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_value_level_commutative_associative(v):
    xs = jets.coordinate_jets(np.array([v[0], v[1]]))
    a, b, c = xs[0] + v[2], jets.sin(xs[1]), xs[0] * xs[1]
    assert_allclose((a * b).c, (b * a).c, rtol=1e-14, atol=1e-14)
    assert_allclose(((a + b) + c).value, (a + (b + c)).value, rtol=1e-14, atol=1e-14)
    assert_allclose(((a * b) * c).value, (a * (b * c)).value, rtol=1e-14, atol=1e-14)


def test_backends_agree(rng):
    if jets._ck is None:
        pytest.skip("compiled kernel not built")
    t = jets.table(3)
    a, b = Jet(rng.normal(size=(50, t.ncoef)), 3), Jet(rng.normal(size=(50, t.ncoef)), 3)
    before = jets.KERNEL_BACKEND
    try:
        jets.set_backend("python")
        p = (a * b).c
        jets.set_backend("cython")
        c = (a * b).c
    finally:
        jets.set_backend(before)
    assert_allclose(p, c, rtol=1e-13, atol=1e-13)


def test_unknown_backend():
    with pytest.raises(ValueError):
        jets.set_backend("fortran")


def test_jeinsum_matches_loops(rng):
    t = jets.table(2)
    A = Jet(rng.normal(size=(4, 2, 3, t.ncoef)), 2)
    B = Jet(rng.normal(size=(4, 3, 2, t.ncoef)), 2)
    C = jeinsum("...ij,...jk->...ik", A, B)
    for p in range(4):
        for i in range(2):
            for k in range(2):
                acc = sum(A[p, i, j] * B[p, j, k] for j in range(3))
                assert_allclose(C[p, i, k].c, acc.c, atol=1e-13)


def test_jeinsum_with_array(rng):
    t = jets.table(2)
    A = Jet(rng.normal(size=(3, 2, t.ncoef)), 2)
    M = rng.normal(size=(2, 2))
    out = jeinsum("...i,ij->...j", A, M)
    assert_allclose(out.c, np.einsum("pic,ij->pjc", A.c, M))


def test_jinv_is_inverse(rng):
    x = np.array([[0.3, -0.2], [1.1, 0.4]])
    xs = jets.coordinate_jets(x)
    m = Jet.stack(
        [Jet.stack([jets.exp(xs[0]) + 2.0, xs[0] * xs[1]], axis=-1), Jet.stack([xs[0] * xs[1], jets.cosh(xs[1]) + 1.0], axis=-1)],
        axis=-2,
    )
    prod = jeinsum("...ij,...jk->...ik", m, jinv(m))
    eye = np.zeros_like(prod.c)
    eye[..., 0, 0, 0] = eye[..., 1, 1, 0] = 1
    assert_allclose(prod.c, eye, atol=1e-12)


def test_derivative_lowers_order():
    x = jet_variable(0, (1.0, 2.0), 2)
    y = jet_variable(1, (1.0, 2.0), 2)
    f = x * x * y
    d = f.d(0)
    assert d.order == 2
    assert coeffs(d)[()] == pytest.approx(4.0)
    assert coeffs(d)[(0, 1)] == pytest.approx(2.0)
    assert coeffs(d.d(0).d(1))[()] == pytest.approx(2.0)
