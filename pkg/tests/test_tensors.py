import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from solitonlab import tensors as T
from solitonlab.errors import AsymmetricMetric, DegenerateMetric, VarianceMismatch

EUC = T.MetricAtPoint.from_components(np.eye(2))
MINK = T.MetricAtPoint.from_components(np.diag([-1.0, 1.0]))


def test_lower_identity_gives_delta():
    ident = T.TensorAtPoint(np.eye(2), ("u", "l"))
    low = T.lower(ident, 0, EUC)
    assert low.variance == ("l", "l")
    assert_allclose(low.components, np.eye(2))


def test_contract_delta_is_dim():
    for n in (2, 3, 4):
        d = T.TensorAtPoint(np.eye(n), ("u", "l"))
        assert T.contract(d, 0, 1).components == pytest.approx(n)


def test_contract_requires_mixed_variance():
    with pytest.raises(VarianceMismatch):
        T.contract(T.TensorAtPoint(np.eye(2), ("l", "l")), 0, 1)
    with pytest.raises(VarianceMismatch):
        T.lower(T.TensorAtPoint(np.eye(2), ("l", "l")), 0, EUC)


def test_raise_dx0_minkowski():
    dx0 = T.TensorAtPoint(np.array([1.0, 0.0]), ("l",))
    assert_allclose(T.raise_(dx0, 0, MINK).components, [-1.0, 0.0])


def test_inner_products():
    for n in (2, 3):
        for g in (np.eye(n), np.diag([-1.0] + [1.0] * (n - 1))):
            assert T.inner_02(g, g, np.linalg.inv(g)) == pytest.approx(n)
    a = 1.7
    dd = np.outer([a, 0], [a, 0])
    assert T.inner_02(dd, dd, np.eye(2)) == pytest.approx(a**4)
    assert T.norm2_02(np.outer([1, 0], [1, 0]), MINK) == pytest.approx(1.0)


def test_vol_density():
    assert T.vol_density(np.eye(2)) == pytest.approx(1.0)
    for th, v in ((np.pi / 2, 1.0), (np.pi / 6, 0.5)):
        assert T.vol_density(np.diag([1.0, np.sin(th) ** 2])) == pytest.approx(v)
    assert T.vol_density(MINK) == pytest.approx(1.0)
    with pytest.raises(DegenerateMetric):
        T.vol_density(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_metric_validation():
    with pytest.raises(AsymmetricMetric):
        T.MetricAtPoint.from_components([[1.0, 0.2], [0.0, 1.0]])
    with pytest.raises(DegenerateMetric):
        T.MetricAtPoint.from_components([[1.0, 2.0], [2.0, 4.0]])
    m = T.MetricAtPoint.from_components(np.diag([-1.0, 2.0, 3.0]))
    assert sorted(m.signature) == [-1, 1, 1]
    assert_allclose(m.g @ m.g_inv, np.eye(3), atol=1e-10)


mats = st.lists(st.floats(-2, 2), min_size=4, max_size=4).map(lambda v: np.array(v).reshape(2, 2))


@st.composite
def metrics(draw):
    m = draw(mats)
    if draw(st.booleans()):
        g = m @ m.T + np.diag([0.5, 0.5])
    else:
        a, b = 0.5 + abs(m[0, 0]), 0.5 + abs(m[1, 1])
        c = 0.3 * m[0, 1]
        g = np.array([[-a, c], [c, b]])
    return T.MetricAtPoint.from_components(g)


@settings(max_examples=60, deadline=None)
@given(mats, metrics())
def test_raise_then_lower_identity(a, g):
    t = T.TensorAtPoint(a, ("l", "l"))
    back = T.lower(T.raise_(t, 1, g), 1, g)
    assert_allclose(back.components, a, atol=1e-11 * max(1, np.abs(a).max()) * np.linalg.cond(g.g))


@settings(max_examples=60, deadline=None)
@given(mats, mats, mats, st.floats(-2, 2), metrics())
def test_inner_symmetric_bilinear(a, b, c, s, g):
    gi = g.g_inv
    assert_allclose(T.inner_02(a, b, gi), T.inner_02(b, a, gi), rtol=1e-12, atol=1e-12 * np.abs(gi).max() ** 2 * 10)
    lhs = T.inner_02(a * s + b, c, gi)
    rhs = s * T.inner_02(a, c, gi) + T.inner_02(b, c, gi)
    assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-11 * max(1, np.abs(gi).max() ** 2) * 10)


@settings(max_examples=60, deadline=None)
@given(mats, mats)
def test_contract_of_product_is_trace(a, b):
    ta = T.TensorAtPoint(a, ("u", "l"))
    tb = T.TensorAtPoint(b, ("u", "l"))
    prod = T.tensor_product(ta, tb)  # a^i_j b^k_l
    inner = T.contract(prod, 1, 2)  # a^i_j b^j_l
    assert_allclose(T.contract(inner, 0, 1).components, np.trace(a @ b), atol=1e-13)
