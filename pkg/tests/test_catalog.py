import copy
import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from solitonlab import catalog, geometry as geo
from solitonlab.connections import is_statistical
from solitonlab.errors import (
    AsymmetricMetric,
    DegenerateMetric,
    ExpressionError,
    NonCompactManifold,
    SpecParseError,
    UnknownManifold,
)
from solitonlab.etaconn import eta_gamma
from solitonlab.jets import jeinsum
from solitonlab.tensors import nondegeneracy_ok

DATA = Path(__file__).parent / "data"

PLANE = {
    "name": "plane",
    "dim": 2,
    "signature": [1, 1],
    "coordinates": ["x", "y"],
    "metric": [["1", "0"], ["0", "1"]],
    "periodic": [],
    "domain": [[-1, 1], [-1, 1]],
}


def doc(**changes):
    d = copy.deepcopy(PLANE)
    for k, v in changes.items():
        if v is None:
            d.pop(k)
        else:
            d[k] = v
    return json.dumps(d)


def test_registry_contents():
    required = {"flat-torus-2", "flat-torus-3", "warped-torus-2", "round-sphere-2", "hyperbolic-2",
                "kenmotsu-3", "pp-wave-4", "minkowski-2", "gradlog-2"}
    assert required <= set(catalog.names())
    with pytest.raises(UnknownManifold):
        catalog.builtin("klein-bottle")
    assert catalog.builtin("builtin:kenmotsu-3") == catalog.builtin("kenmotsu-3")
    assert catalog.resolve("builtin:minkowski-2").signature == (-1, 1)


def test_minimal_plane():
    s = catalog.loads(doc())
    assert s.dim == 2
    assert_allclose(s.metric_jet(np.zeros((1, 2))).value[0], np.eye(2))
    assert not s.compact and not s.has_potential
    with pytest.raises(NonCompactManifold):
        s.grid(16)


def test_golden_warped_torus():
    s = catalog.load(DATA / "warped-torus-2.json")
    ref = catalog.builtin("warped-torus-2")
    for field in ("name", "dim", "signature", "coordinates", "metric", "periodic", "domain", "f", "oneform", "eta", "J", "lam"):
        assert getattr(s, field) == getattr(ref, field), field
    assert s == ref


@pytest.mark.parametrize("name", catalog.names())
def test_round_trip(name, tmp_path):
    s = catalog.builtin(name)
    assert catalog.loads(catalog.dumps(s)) == s
    path = tmp_path / f"{name}.json"
    catalog.dump(s, path)
    assert catalog.load(path) == s
    assert catalog.load(str(path)) == s


@pytest.mark.parametrize(
    "changes, field",
    [
        (dict(colour="red"), "colour"),
        (dict(dim=None), "dim"),
        (dict(dim=0), "dim"),
        (dict(dim=True), "dim"),
        (dict(signature=[1, 2]), "signature"),
        (dict(coordinates=["x", "x"]), "coordinates"),
        (dict(coordinates=["x", "sin"]), "coordinates"),
        (dict(metric=[["1", "0"]]), "metric"),
        (dict(metric=[["1", 0], ["0", "1"]]), "metric"),
        (dict(periodic=[{"coordinate": "z", "period": 1.0}]), "periodic"),
        (dict(periodic=[{"coordinate": "x", "period": -1}]), "periodic"),
        (dict(domain=[[1, -1], [0, 1]]), "domain"),
        (dict(f=3), "f"),
        (dict(eta=["1"]), "eta"),
        (dict(signature=[-1, 1]), "signature"),
    ],
)
def test_parse_errors(changes, field):
    with pytest.raises(SpecParseError) as err:
        catalog.loads(doc(**changes))
    assert err.value.field == field


def test_invalid_json_and_missing_path():
    with pytest.raises(SpecParseError):
        catalog.loads("{not json")
    with pytest.raises(SpecParseError):
        catalog.load("/nonexistent/spec.json")


def test_asymmetric_and_degenerate():
    with pytest.raises(AsymmetricMetric):
        catalog.loads(doc(metric=[["1", "x"], ["0", "1"]]))
    with pytest.raises(DegenerateMetric):
        catalog.loads(doc(metric=[["1", "1"], ["1", "1"]]))
    # symmetric as written, even if spelled with different spacing
    assert catalog.loads(doc(metric=[["1", "x*y"], ["x * y", "2"]])).dim == 2


def test_expression_errors():
    with pytest.raises(ExpressionError) as err:
        catalog.loads(doc(f="sin(x"))
    assert str(err.value).startswith("f:") and err.value.offset is not None
    with pytest.raises(ExpressionError):
        catalog.loads(doc(f="z + 1"))


@pytest.mark.parametrize("name", catalog.names())
def test_builtin_invariants(name):
    s = catalog.builtin(name)
    x = s.sample(50, 42)
    g = s.metric_jet(x)
    assert np.all(nondegeneracy_ok(g.value))
    assert_allclose(g.value, np.swapaxes(g.value, -1, -2), atol=0)
    assert is_statistical(g, eta_gamma(g, s.eta_jet(x)), 1e-10).passed
    lo, hi = np.array(s.domain).T
    assert np.all((x >= lo) & (x <= hi))


def test_kenmotsu_and_pp_wave():
    k = catalog.builtin("kenmotsu-3")
    x = k.sample(20, 0)
    g = k.metric_jet(x)
    gi = geo.inverse(g)
    xi = jeinsum("...ij,...j->...i", gi, k.eta_jet(x))
    A = geo.cov_deriv_vector(geo.christoffel(g, gi), xi).value
    e = np.zeros(3)
    e[0] = 1
    assert_allclose(A, np.broadcast_to(np.eye(3) - np.outer(e, e), A.shape), atol=1e-11)
    assert np.abs(geo.ricci(geo.riemann(geo.christoffel(catalog.builtin("flat-torus-2").metric_jet(x[:, :2])))).value).max() == 0


def test_sample_deterministic():
    s = catalog.builtin("round-sphere-2")
    assert_allclose(s.sample(10, 3), s.sample(10, 3))
    assert not np.allclose(s.sample(10, 3), s.sample(10, 4))
    assert s.compact is False and catalog.builtin("flat-torus-3").compact


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_expressions_compile(seed):
    s = catalog.builtin("hyperbolic-2")
    rng = np.random.default_rng(seed)
    x = s.sample(4, seed)
    eta = catalog.compile_field(s, catalog.random_eta_exprs(s, rng))(x)
    f = catalog.compile_scalar(s, catalog.random_scalar_expr(s, rng))(x)
    assert eta.shape == (4, 2) and f.shape == (4,)
    assert np.all(np.isfinite(eta.c)) and np.all(np.isfinite(f.c))
