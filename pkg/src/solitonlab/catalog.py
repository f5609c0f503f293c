"""Built-in manifold charts and the JSON manifold-spec loader."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import exprlang
from .errors import (
    AsymmetricMetric,
    DegenerateMetric,
    ExprSyntaxError,
    ExpressionError,
    SpecParseError,
    UnknownManifold,
)
from .integrate import PeriodicGrid, potential_from_oneform
from .jets import Jet
from .tensors import nondegeneracy_ok

REQUIRED = ("name", "dim", "signature", "coordinates", "metric", "periodic", "domain")
OPTIONAL = ("f", "oneform", "eta", "J", "lambda")
FIELDS = REQUIRED + OPTIONAL

DOMAIN_MARGIN = 0.05


@dataclass(frozen=True)
class ManifoldSpec:
    name: str
    dim: int
    signature: tuple
    coordinates: tuple
    metric: tuple
    periodic: tuple = ()
    domain: tuple = ()
    f: str | None = None
    oneform: tuple | None = None
    eta: tuple | None = None
    J: tuple | None = None
    lam: str | None = field(default=None)

    # compiled expressions -----------------------------------------------------

    def _compile(self, text, where):
        try:
            return exprlang.compile_expr(text, self.dim, self.coordinates)
        except ExprSyntaxError as exc:
            # documents report every bad expression as ExpressionError
            raise ExpressionError(f"{where}: {exc}", offset=exc.offset) from exc
        except ExpressionError as exc:
            exc.args = (f"{where}: {exc}",) + exc.args[1:]
            raise

    @cached_property
    def _metric_nodes(self):
        return [[self._compile(e, f"metric[{i}][{j}]") for j, e in enumerate(row)] for i, row in enumerate(self.metric)]

    @cached_property
    def _f_node(self):
        return None if self.f is None else self._compile(self.f, "f")

    @cached_property
    def _oneform_nodes(self):
        return None if self.oneform is None else [self._compile(e, f"oneform[{i}]") for i, e in enumerate(self.oneform)]

    @cached_property
    def _eta_nodes(self):
        return None if self.eta is None else [self._compile(e, f"eta[{i}]") for i, e in enumerate(self.eta)]

    @cached_property
    def _J_nodes(self):
        if self.J is None:
            return None
        return [[self._compile(e, f"J[{i}][{j}]") for j, e in enumerate(row)] for i, row in enumerate(self.J)]

    @cached_property
    def _lam_node(self):
        return None if self.lam is None else self._compile(self.lam, "lambda")

    def compile_all(self):
        """Parse and bind every expression (raises on the first bad one)."""
        self._metric_nodes, self._f_node, self._oneform_nodes, self._eta_nodes, self._J_nodes, self._lam_node
        return self

    # field jets at a batch of points -------------------------------------------

    def _vars(self, x):
        from .jets import coordinate_jets

        x = np.asarray(x, dtype=float)
        return coordinate_jets(x)

    def _eval(self, node, xv):
        return exprlang.eval_jet(node, None, _vars=xv)

    def _vector(self, nodes, x):
        xv = self._vars(x)
        return Jet.stack([self._eval(n, xv) for n in nodes], axis=-1)

    def _matrix(self, nodes, x):
        xv = self._vars(x)
        rows = [Jet.stack([self._eval(n, xv) for n in row], axis=-1) for row in nodes]
        return Jet.stack(rows, axis=-2)

    def metric_jet(self, x):
        return self._matrix(self._metric_nodes, x)

    @property
    def has_potential(self):
        return self.f is not None or self.oneform is not None

    def potential_jet(self, x):
        """``f`` (or the local potential of ``oneform``); None when neither is given."""
        if self._f_node is not None:
            return self._eval(self._f_node, self._vars(x))
        if self._oneform_nodes is not None:
            return potential_from_oneform(self._vector(self._oneform_nodes, x))
        return None

    def oneform_jet(self, x):
        """``df`` data: ``oneform`` when given, else ``d f``."""
        if self._oneform_nodes is not None:
            return self._vector(self._oneform_nodes, x)
        f = self.potential_jet(x)
        return None if f is None else f.grad()

    def eta_jet(self, x):
        """Declared ``eta``; falls back to the ``df`` data."""
        if self._eta_nodes is not None:
            return self._vector(self._eta_nodes, x)
        return self.oneform_jet(x)

    def J_jet(self, x):
        return None if self._J_nodes is None else self._matrix(self._J_nodes, x)

    def lambda_jet(self, x):
        if self._lam_node is None:
            x = np.asarray(x, dtype=float)
            return Jet.constant(np.zeros(x.shape[:-1]), self.dim)
        return self._eval(self._lam_node, self._vars(x))

    # domain ------------------------------------------------------------------------

    @property
    def periods(self):
        out = [None] * self.dim
        for coord, period in self.periodic:
            out[self.coordinates.index(coord)] = float(period)
        return out

    @property
    def compact(self):
        return all(p is not None for p in self.periods)

    def grid(self, resolution=64):
        from .errors import NonCompactManifold

        if not self.compact:
            raise NonCompactManifold(f"{self.name} is not compact (not every coordinate is periodic)")
        return PeriodicGrid(self.dim, tuple(self.periods), (resolution,) * self.dim)

    @property
    def center(self):
        return np.array([(lo + hi) / 2 for lo, hi in self.domain])

    def sample(self, n, seed):
        """Seeded uniform points in the domain box, shrunk by a 5% margin per side."""
        rng = np.random.default_rng(seed)
        lo = np.array([a for a, _ in self.domain], dtype=float)
        hi = np.array([b for _, b in self.domain], dtype=float)
        pad = DOMAIN_MARGIN * (hi - lo)
        return rng.uniform(lo + pad, hi - pad, size=(n, self.dim))

    def nondegenerate_mask(self, x):
        return nondegeneracy_ok(self.metric_jet(x).value)

    # serialisation -------------------------------------------------------------------

    def to_dict(self):
        d = {
            "name": self.name,
            "dim": self.dim,
            "signature": list(self.signature),
            "coordinates": list(self.coordinates),
            "metric": [list(r) for r in self.metric],
            "periodic": [{"coordinate": c, "period": p} for c, p in self.periodic],
            "domain": [[lo, hi] for lo, hi in self.domain],
        }
        if self.f is not None:
            d["f"] = self.f
        if self.oneform is not None:
            d["oneform"] = list(self.oneform)
        if self.eta is not None:
            d["eta"] = list(self.eta)
        if self.J is not None:
            d["J"] = [list(r) for r in self.J]
        if self.lam is not None:
            d["lambda"] = self.lam
        return d

    def __eq__(self, other):
        return isinstance(other, ManifoldSpec) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(json.dumps(self.to_dict(), sort_keys=True))


def dumps(spec):
    return json.dumps(spec.to_dict(), indent=2)


def dump(spec, path):
    Path(path).write_text(dumps(spec) + "\n", encoding="utf-8")


# parsing ----------------------------------------------------------------------------


def _strings(value, fieldname, shape):
    arr = np.array(value, dtype=object)
    if arr.shape != shape:
        raise SpecParseError(fieldname, f"expected shape {shape}, got {arr.shape}")
    for v in arr.flat:
        if not isinstance(v, str):
            raise SpecParseError(fieldname, f"entries must be expression strings, got {v!r}")
    if len(shape) == 1:
        return tuple(value)
    return tuple(tuple(r) for r in value)


def from_dict(d):
    if not isinstance(d, dict):
        raise SpecParseError("<root>", "document must be an object")
    unknown = sorted(set(d) - set(FIELDS))
    if unknown:
        raise SpecParseError(unknown[0], "unknown field")
    for k in REQUIRED:
        if k not in d:
            raise SpecParseError(k, "missing required field")
    name = d["name"]
    if not isinstance(name, str) or not name:
        raise SpecParseError("name", "must be a non-empty string")
    dim = d["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise SpecParseError("dim", "must be a positive integer")
    sig = d["signature"]
    if not isinstance(sig, list) or len(sig) != dim or any(s not in (1, -1) for s in sig):
        raise SpecParseError("signature", f"must be a list of {dim} entries, each +1 or -1")
    coords = d["coordinates"]
    if not isinstance(coords, list) or len(coords) != dim or not all(isinstance(c, str) for c in coords):
        raise SpecParseError("coordinates", f"must be a list of {dim} names")
    if len(set(coords)) != dim:
        raise SpecParseError("coordinates", "names must be distinct")
    for c in coords:
        if c in exprlang.FUNCTION_NAMES or c in exprlang.CONSTANTS or not c.isidentifier():
            raise SpecParseError("coordinates", f"invalid coordinate name {c!r}")
    metric = _strings(d["metric"], "metric", (dim, dim))
    periodic = []
    if not isinstance(d["periodic"], list):
        raise SpecParseError("periodic", "must be a list")
    for entry in d["periodic"]:
        if not isinstance(entry, dict) or set(entry) != {"coordinate", "period"}:
            raise SpecParseError("periodic", "entries must be {coordinate, period}")
        if entry["coordinate"] not in coords:
            raise SpecParseError("periodic", f"unknown coordinate {entry['coordinate']!r}")
        p = entry["period"]
        if not isinstance(p, (int, float)) or isinstance(p, bool) or not p > 0:
            raise SpecParseError("periodic", "period must be a positive number")
        periodic.append((entry["coordinate"], float(p)))
    domain = d["domain"]
    if not isinstance(domain, list) or len(domain) != dim:
        raise SpecParseError("domain", f"must be a list of {dim} [lo, hi] pairs")
    box = []
    for pair in domain:
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)
            or not pair[0] < pair[1]
        ):
            raise SpecParseError("domain", f"bad interval {pair!r}")
        box.append((float(pair[0]), float(pair[1])))
    opt = {}
    if "f" in d:
        if not isinstance(d["f"], str):
            raise SpecParseError("f", "must be an expression string")
        opt["f"] = d["f"]
    if "oneform" in d:
        opt["oneform"] = _strings(d["oneform"], "oneform", (dim,))
    if "eta" in d:
        opt["eta"] = _strings(d["eta"], "eta", (dim,))
    if "J" in d:
        opt["J"] = _strings(d["J"], "J", (dim, dim))
    if "lambda" in d:
        if not isinstance(d["lambda"], str):
            raise SpecParseError("lambda", "must be an expression string")
        opt["lam"] = d["lambda"]
    spec = ManifoldSpec(name, dim, tuple(sig), tuple(coords), metric, tuple(periodic), tuple(box), **opt)
    validate(spec)
    return spec


def validate(spec):
    """Parse every expression, check symmetry as written and probe the center."""
    spec.compile_all()
    for i in range(spec.dim):
        for j in range(i + 1, spec.dim):
            a = exprlang.parse(spec.metric[i][j])
            b = exprlang.parse(spec.metric[j][i])
            if a != b:
                raise AsymmetricMetric(f"metric[{i}][{j}] = {spec.metric[i][j]!r} differs from metric[{j}][{i}] = {spec.metric[j][i]!r}")
    g = spec.metric_jet(spec.center).value
    if not nondegeneracy_ok(g):
        raise DegenerateMetric(f"{spec.name}: metric degenerate at the domain center", tuple(spec.center))
    eig = np.linalg.eigvalsh(g)
    if sorted(int(s) for s in np.sign(eig)) != sorted(spec.signature):
        raise SpecParseError("signature", f"declared {list(spec.signature)} but metric at the center has eigenvalues {eig.tolist()}")
    return spec


def loads(text):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError("<document>", f"invalid JSON: {exc}") from None
    return from_dict(d)


def load(path_or_text):
    """Load a spec from a path, or from document text when it starts with ``{``."""
    s = str(path_or_text)
    if s.lstrip().startswith("{"):
        return loads(s)
    p = Path(s)
    if not p.is_file():
        raise SpecParseError("<path>", f"no such file: {s}")
    return loads(p.read_text(encoding="utf-8"))


# builtins -----------------------------------------------------------------------

TWO_PI = 2 * math.pi

_BUILTINS = {
    "flat-torus-2": {
        "name": "flat-torus-2",
        "dim": 2,
        "signature": [1, 1],
        "coordinates": ["x", "y"],
        "metric": [["1", "0"], ["0", "1"]],
        "periodic": [{"coordinate": "x", "period": TWO_PI}, {"coordinate": "y", "period": TWO_PI}],
        "domain": [[0.0, TWO_PI], [0.0, TWO_PI]],
        "oneform": ["1", "0"],
        "lambda": "2",
    },
    "flat-torus-3": {
        "name": "flat-torus-3",
        "dim": 3,
        "signature": [1, 1, 1],
        "coordinates": ["x", "y", "z"],
        "metric": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]],
        "periodic": [
            {"coordinate": "x", "period": TWO_PI},
            {"coordinate": "y", "period": TWO_PI},
            {"coordinate": "z", "period": TWO_PI},
        ],
        "domain": [[0.0, TWO_PI], [0.0, TWO_PI], [0.0, TWO_PI]],
        "oneform": ["1", "0", "0"],
    },
    "warped-torus-2": {
        "name": "warped-torus-2",
        "dim": 2,
        "signature": [1, 1],
        "coordinates": ["x", "y"],
        "metric": [["1", "0"], ["0", "(2 + cos(x))^2"]],
        "periodic": [{"coordinate": "x", "period": TWO_PI}, {"coordinate": "y", "period": TWO_PI}],
        "domain": [[0.0, TWO_PI], [0.0, TWO_PI]],
        "oneform": ["1", "0"],
    },
    "round-sphere-2": {
        "name": "round-sphere-2",
        "dim": 2,
        "signature": [1, 1],
        "coordinates": ["theta", "phi"],
        "metric": [["1", "0"], ["0", "sin(theta)^2"]],
        "periodic": [{"coordinate": "phi", "period": TWO_PI}],
        "domain": [[0.2, math.pi - 0.2], [0.0, TWO_PI]],
        "f": "cos(theta)",
        "lambda": "1 - cos(theta)",
    },
    "hyperbolic-2": {
        "name": "hyperbolic-2",
        "dim": 2,
        "signature": [1, 1],
        "coordinates": ["x", "y"],
        "metric": [["1/y^2", "0"], ["0", "1/y^2"]],
        "periodic": [],
        "domain": [[-1.0, 1.0], [0.5, 2.0]],
        "f": "log(y) + x^2/y",
    },
    "kenmotsu-3": {
        "name": "kenmotsu-3",
        "dim": 3,
        "signature": [1, 1, 1],
        "coordinates": ["t", "x", "y"],
        "metric": [["1", "0", "0"], ["0", "exp(2*t)", "0"], ["0", "0", "exp(2*t)"]],
        "periodic": [],
        "domain": [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]],
        "f": "t",
        "eta": ["1", "0", "0"],
        "J": [["-1", "0", "0"], ["0", "0", "0"], ["0", "0", "0"]],
        "lambda": "2",
    },
    "pp-wave-4": {
        "name": "pp-wave-4",
        "dim": 4,
        "signature": [-1, 1, 1, 1],
        "coordinates": ["u", "v", "x", "y"],
        "metric": [
            ["x^2 - y^2", "1", "0", "0"],
            ["1", "0", "0", "0"],
            ["0", "0", "1", "0"],
            ["0", "0", "0", "1"],
        ],
        "periodic": [],
        "domain": [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]],
        "f": "u",
        "eta": ["1", "0", "0", "0"],
    },
    "minkowski-2": {
        "name": "minkowski-2",
        "dim": 2,
        "signature": [-1, 1],
        "coordinates": ["t", "x"],
        "metric": [["-1", "0"], ["0", "1"]],
        "periodic": [],
        "domain": [[-1.0, 1.0], [-1.0, 1.0]],
        "f": "t*x + sin(x)",
    },
    "gradlog-2": {
        "name": "gradlog-2",
        "dim": 2,
        "signature": [1, 1],
        "coordinates": ["x", "y"],
        "metric": [["1", "0"], ["0", "1"]],
        "periodic": [],
        "domain": [[-1.0, 0.5], [-1.0, 1.0]],
        "f": "-log(1 - x)",
    },
    "flat-plane-2": {
        "name": "flat-plane-2",
        "dim": 2,
        "signature": [1, 1],
        "coordinates": ["x", "y"],
        "metric": [["1", "0"], ["0", "1"]],
        "periodic": [],
        "domain": [[-2.0, 2.0], [-2.0, 2.0]],
        "eta": ["0", "x"],
    },
}


def names():
    return list(_BUILTINS)


def builtin(name):
    if name.startswith("builtin:"):
        name = name[len("builtin:") :]
    try:
        d = _BUILTINS[name]
    except KeyError:
        raise UnknownManifold(f"unknown builtin manifold {name!r}; known: {', '.join(_BUILTINS)}") from None
    return from_dict(json.loads(json.dumps(d)))


def resolve(ref):
    """``builtin:NAME``, a bare builtin name, a path or document text."""
    s = str(ref)
    if s.startswith("builtin:") or s in _BUILTINS:
        return builtin(s)
    return load(s)


def random_eta_exprs(spec, rng):
    """A smooth random one-form on ``spec``'s chart, as expression strings."""
    out = []
    c = spec.coordinates
    for _ in range(spec.dim):
        a, b, k = rng.uniform(-1, 1, size=3)
        i, j = rng.integers(0, spec.dim, size=2)
        w = rng.uniform(0.5, 1.5)
        out.append(f"{a:.6f} + {b:.6f}*sin({w:.6f}*{c[i]} + {k:.6f}) + {k * b:.6f}*{c[j]}")
    return tuple(out)


def random_scalar_expr(spec, rng):
    c = spec.coordinates
    a, b, k = rng.uniform(-1, 1, size=3)
    i, j = rng.integers(0, spec.dim, size=2)
    w = rng.uniform(0.5, 1.5)
    return f"{a:.6f}*{c[i]}*{c[j]} + {b:.6f}*cos({w:.6f}*{c[j]} + {k:.6f})"


def compile_field(spec, exprs):
    """Vector of jets for expression strings bound to ``spec``'s coordinates."""
    nodes = [spec._compile(e, "field") for e in exprs]
    return lambda x: spec._vector(nodes, x)


def compile_scalar(spec, expr):
    node = spec._compile(expr, "field")
    return lambda x: spec._eval(node, spec._vars(x))
