"""Order-3 multivariate jets stored as raw partial derivatives.

A :class:`Jet` holds an array of jets at once: ``c`` has shape
``(*shape, ncoef)`` where the last axis runs over every sorted multi-index of
total degree <= 3 in ``dim`` variables.  Coefficients are the partials
``d^alpha u`` themselves, not Taylor coefficients divided by ``alpha!``.

Each jet carries an ``order`` (<= 3): differentiation lowers it by one and
binary operations keep the minimum.  Coefficients above ``order`` are zero and
carry no information.

The product kernel is compiled when the extension is built and falls back to
numpy otherwise; ``KERNEL_BACKEND`` reports which one is active.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement, product

import numpy as np

from .errors import DomainError, JetDivisionByZero

try:
    from . import _kernel as _ck
except ImportError:  # extension not built
    _ck = None
from . import _kernel_py as _pk

ORDER = 3
MAX_DIM = 8
KERNEL_BACKEND = _ck.BACKEND if _ck is not None else _pk.BACKEND
_use_compiled = _ck is not None


def set_backend(name):
    """Select ``"cython"`` or ``"python"`` for the product kernel."""
    global _use_compiled, KERNEL_BACKEND
    if name == "cython":
        if _ck is None:
            raise RuntimeError("compiled kernel not available; build the extension")
        _use_compiled = True
    elif name == "python":
        _use_compiled = False
    else:
        raise ValueError(f"unknown backend {name!r}")
    KERNEL_BACKEND = name


class _Table:
    """Multi-index bookkeeping for one chart dimension."""

    def __init__(self, dim):
        self.dim = dim
        self.multi = [()]
        for k in range(1, ORDER + 1):
            self.multi.extend(combinations_with_replacement(range(dim), k))
        self.index = {m: i for i, m in enumerate(self.multi)}
        self.ncoef = len(self.multi)
        self.degree = np.array([len(m) for m in self.multi])
        # masks[r]: slots of degree <= r
        self.masks = [self.degree <= r for r in range(ORDER + 1)]

        # Leibniz pairs, grouped by output degree so truncated products can
        # stop early.
        rows = []
        for g, gm in enumerate(self.multi):
            counts = [gm.count(v) for v in range(dim)]
            for sub in product(*(range(c + 1) for c in counts)):
                am = tuple(v for v in range(dim) for _ in range(sub[v]))
                bm = tuple(v for v in range(dim) for _ in range(counts[v] - sub[v]))
                coef = 1.0
                for v in range(dim):
                    coef *= math.comb(counts[v], sub[v])
                rows.append((len(gm), self.index[am], self.index[bm], g, coef))
        rows.sort(key=lambda r: r[0])
        self.ai = np.array([r[1] for r in rows], dtype=np.int64)
        self.bi = np.array([r[2] for r in rows], dtype=np.int64)
        self.gi = np.array([r[3] for r in rows], dtype=np.int64)
        self.coef = np.array([r[4] for r in rows], dtype=np.float64)
        degs = np.array([r[0] for r in rows])
        self.npairs = [int(np.sum(degs <= r)) for r in range(ORDER + 1)]
        self.scatter = []
        for r in range(ORDER + 1):
            n = self.npairs[r]
            s = np.zeros((n, self.ncoef))
            s[np.arange(n), self.gi[:n]] = 1.0
            self.scatter.append(s)

        # shift[i][alpha] = slot of alpha + e_i (only for |alpha| < ORDER)
        self.shift = []
        lower = [k for k, m in enumerate(self.multi) if len(m) < ORDER]
        self.lower = np.array(lower, dtype=np.int64)
        for i in range(dim):
            self.shift.append(
                np.array([self.index[tuple(sorted(self.multi[k] + (i,)))] for k in lower], dtype=np.int64)
            )


@lru_cache(maxsize=None)
def table(dim):
    if not 1 <= dim <= MAX_DIM:
        raise ValueError(f"jet dimension must be in 1..{MAX_DIM}, got {dim}")
    return _Table(dim)


def _raw_mul(a, b, dim, order):
    """Product of two coefficient arrays with identical leading shape."""
    t = table(dim)
    shape = a.shape[:-1]
    a2 = np.ascontiguousarray(a.reshape(-1, t.ncoef))
    b2 = np.ascontiguousarray(b.reshape(-1, t.ncoef))
    n = t.npairs[order]
    if _use_compiled:
        out = _ck.jet_mul(a2, b2, t.ai[:n], t.bi[:n], t.coef[:n], t.gi[:n], t.ncoef)
    else:
        out = _pk.jet_mul(a2, b2, t.ai[:n], t.bi[:n], t.coef[:n], t.scatter[order])
    return out.reshape(shape + (t.ncoef,))


class Jet:
    """Array of truncated jets; see the module docstring for the layout."""

    __slots__ = ("c", "dim", "order")
    __array_priority__ = 100

    def __init__(self, c, dim, order=ORDER):
        self.c = c
        self.dim = dim
        self.order = order

    # construction ------------------------------------------------------
    @classmethod
    def constant(cls, value, dim):
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (table(dim).ncoef,))
        c[..., 0] = value
        return cls(c, dim, ORDER)

    @classmethod
    def zeros(cls, shape, dim, order=ORDER):
        return cls(np.zeros(tuple(shape) + (table(dim).ncoef,)), dim, order)

    @classmethod
    def stack(cls, jets, axis=0):
        jets = list(jets)
        dim = jets[0].dim
        order = min(j.order for j in jets)
        ax = axis if axis >= 0 else axis - 1
        return cls(np.stack([j.c for j in jets], axis=ax), dim, order)

    # introspection -----------------------------------------------------
    @property
    def shape(self):
        return self.c.shape[:-1]

    @property
    def ndim(self):
        return self.c.ndim - 1

    @property
    def value(self):
        return self.c[..., 0]

    def partial(self, *alpha):
        """Stored partial ``d_alpha`` (alpha given as coordinate indices)."""
        alpha = tuple(sorted(alpha))
        if len(alpha) > self.order:
            raise ValueError(f"partial of degree {len(alpha)} exceeds jet order {self.order}")
        return self.c[..., table(self.dim).index[alpha]]

    def gradient_values(self):
        """First partials as an array of shape ``(*shape, dim)``."""
        return self.c[..., 1 : 1 + self.dim]

    def __repr__(self):
        return f"Jet(shape={self.shape}, dim={self.dim}, order={self.order})"

    # indexing / reshaping ----------------------------------------------
    def __getitem__(self, key):
        if not isinstance(key, tuple):
            key = (key,)
        if not any(k is Ellipsis for k in key):
            key = key + (Ellipsis,)
        return Jet(self.c[key + (slice(None),)], self.dim, self.order)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        return Jet(self.c.transpose(tuple(axes) + (self.ndim,)), self.dim, self.order)

    @property
    def T(self):
        return self.transpose()

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return Jet(self.c.reshape(tuple(shape) + (self.c.shape[-1],)), self.dim, self.order)

    def sum(self, axis=None):
        if axis is None:
            axis = tuple(range(self.ndim))
        if isinstance(axis, int):
            axis = (axis,)
        axis = tuple(a if a >= 0 else a + self.ndim for a in axis)
        return Jet(self.c.sum(axis=axis), self.dim, self.order)

    def truncate(self, order):
        """Copy with coefficients above ``order`` dropped."""
        order = min(order, self.order)
        c = self.c * table(self.dim).masks[order]
        return Jet(c, self.dim, order)

    # calculus ----------------------------------------------------------
    def d(self, i):
        """Partial derivative along coordinate ``i``; the order drops by one."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        t = table(self.dim)
        if not 0 <= i < self.dim:
            raise IndexError(f"coordinate index {i} out of range for dim {self.dim}")
        c = np.zeros_like(self.c)
        c[..., t.lower] = self.c[..., t.shift[i]]
        c *= t.masks[self.order - 1]
        return Jet(c, self.dim, self.order - 1)

    def grad(self):
        """All partials stacked on a new trailing axis: shape ``(*shape, dim)``."""
        return Jet.stack([self.d(i) for i in range(self.dim)], axis=-1)

    # arithmetic --------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.dim != self.dim:
                raise ValueError(f"jet dimension mismatch: {self.dim} vs {other.dim}")
            return other
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            c = self.c.copy()
            c[..., 0] = c[..., 0] + np.asarray(other, dtype=float)
            return Jet(c, self.dim, self.order)
        order = min(self.order, o.order)
        c = self.c + o.c
        if self.order != o.order:
            c = c * table(self.dim).masks[order]
        return Jet(c, self.dim, order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.dim, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return Jet(self.c * np.asarray(other, dtype=float)[..., None], self.dim, self.order)
        order = min(self.order, o.order)
        a, b = np.broadcast_arrays(self.c, o.c)
        return Jet(_raw_mul(a, b, self.dim, order), self.dim, order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            other = np.asarray(other, dtype=float)
            if np.any(other == 0):
                raise JetDivisionByZero("division by zero")
            return Jet(self.c / other[..., None], self.dim, self.order)
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet):
            if _is_constant(p):
                return self.pow_const(float(p.value)) if p.ndim == 0 else _pow_jet(self, p)
            return _pow_jet(self, p)
        return self.pow_const(p)

    # elementary functions ---------------------------------------------
    def compose(self, derivs):
        """Apply a univariate function given its derivatives at the value.

        ``derivs`` is a sequence ``[phi(v), phi'(v), phi''(v), phi'''(v)]`` of
        arrays broadcastable to ``self.shape``.  Since ``u = self - v`` has no
        constant term, ``sum_k phi^(k)(v) u^k / k!`` is exact through order 3.
        """
        u = Jet(self.c.copy(), self.dim, self.order)
        u.c[..., 0] = 0.0
        out = Jet.constant(np.broadcast_to(np.asarray(derivs[0], float), self.shape), self.dim)
        out.order = self.order
        if self.order == 0:
            return out
        out = out + u * np.asarray(derivs[1], float)
        power = u
        for k in range(2, self.order + 1):
            power = power * u
            out = out + power * (np.asarray(derivs[k], float) / math.factorial(k))
        return out

    def reciprocal(self):
        v = self.value
        if np.any(v == 0):
            raise JetDivisionByZero("division by a jet with zero value")
        return self.compose([1 / v, -1 / v**2, 2 / v**3, -6 / v**4])

    def pow_const(self, p):
        p = float(p)
        v = self.value
        if p == 0:
            return Jet.constant(np.ones(self.shape), self.dim)
        if p.is_integer() and p > 0:
            n = int(p)
            out = self
            for _ in range(n - 1):
                out = out * self
            return out
        if p.is_integer():
            if np.any(v == 0):
                raise JetDivisionByZero("negative power of a jet with zero value")
        elif np.any(v < 0) or (p < 0 and np.any(v == 0)):
            raise DomainError(f"non-integer power {p} of a non-positive value")
        elif np.any(v == 0):
            raise DomainError(f"power {p} is not differentiable at 0")
        return self.compose([v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2), p * (p - 1) * (p - 2) * v ** (p - 3)])


def _is_constant(j):
    return bool(np.all(j.c[..., 1:] == 0))


def _pow_jet(a, b):
    return exp(b * log(a))


def jet_variable(i, x, dim=None):
    """Seed jet of coordinate ``i`` at point ``x``.

    ``x`` may carry leading batch axes (shape ``(..., dim)``), giving one jet
    per point.
    """
    x = np.asarray(x, dtype=float)
    if dim is None:
        dim = x.shape[-1]
    if x.shape[-1] != dim:
        raise ValueError(f"point has {x.shape[-1]} coordinates, expected {dim}")
    if not 0 <= i < dim:
        raise IndexError(f"coordinate index {i} out of range for dim {dim}")
    j = Jet.constant(x[..., i], dim)
    j.c[..., 1 + i] = 1.0
    return j


def coordinate_jets(x):
    x = np.asarray(x, dtype=float)
    return [jet_variable(i, x) for i in range(x.shape[-1])]


# elementary functions ---------------------------------------------------


def sin(a):
    s, c = np.sin(a.value), np.cos(a.value)
    return a.compose([s, c, -s, -c])


def cos(a):
    s, c = np.sin(a.value), np.cos(a.value)
    return a.compose([c, -s, -c, s])


def tan(a):
    t = np.tan(a.value)
    s2 = 1 + t * t
    return a.compose([t, s2, 2 * t * s2, s2 * (2 * s2 + 4 * t * t)])


def exp(a):
    e = np.exp(a.value)
    return a.compose([e, e, e, e])


def log(a):
    v = a.value
    if np.any(v <= 0):
        raise DomainError("log of a non-positive value")
    return a.compose([np.log(v), 1 / v, -1 / v**2, 2 / v**3])


def sqrt(a):
    if np.any(a.value <= 0):
        raise DomainError("sqrt of a non-positive value")
    return a.pow_const(0.5)


def sinh(a):
    s, c = np.sinh(a.value), np.cosh(a.value)
    return a.compose([s, c, s, c])


def cosh(a):
    s, c = np.sinh(a.value), np.cosh(a.value)
    return a.compose([c, s, c, s])


def tanh(a):
    t = np.tanh(a.value)
    s = 1 - t * t
    return a.compose([t, s, -2 * t * s, s * (6 * t * t - 2)])


def absolute(a):
    v = a.value
    if np.any(v == 0):
        raise DomainError("abs is not differentiable at 0")
    sg = np.sign(v)
    z = np.zeros_like(v)
    return a.compose([np.abs(v), sg, z, z])


FUNCTIONS = {
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "sinh": sinh,
    "cosh": cosh,
    "tanh": tanh,
    "abs": absolute,
}


# contractions -----------------------------------------------------------


_BATCH = "ABCDEFGH"


def _expand_ellipsis(subs, rank):
    if "..." not in subs:
        return subs
    explicit = subs.replace("...", "")
    m = rank - len(explicit)
    if m < 0 or m > len(_BATCH):
        raise ValueError(f"cannot match subscripts {subs!r} to rank {rank}")
    return subs.replace("...", _BATCH[len(_BATCH) - m :])


def jeinsum(subscripts, a, b):
    """Two-operand einsum over jet arrays (or a jet and a plain array).

    Subscripts are explicit (``'ij,jk->ik'``) with an optional leading
    ``...`` for broadcast batch axes.  Letters absent from the output are
    summed after the jet product.
    """
    ins, out = subscripts.replace(" ", "").split("->")
    sa, sb = ins.split(",")

    def rank(op):
        return op.ndim if isinstance(op, Jet) else np.ndim(op)

    sa = _expand_ellipsis(sa, rank(a))
    sb = _expand_ellipsis(sb, rank(b))
    if "..." in out:
        nb = max(len([ch for ch in sa if ch in _BATCH]), len([ch for ch in sb if ch in _BATCH]))
        out = out.replace("...", _BATCH[len(_BATCH) - nb :])
    letters = list(out)
    for s in sa + sb:
        if s not in letters:
            letters.append(s)

    def align(op, subs):
        arr = op.c if isinstance(op, Jet) else np.asarray(op, dtype=float)
        lead = arr.ndim - (1 if isinstance(op, Jet) else 0)
        if lead != len(subs):
            raise ValueError(f"operand rank {lead} does not match subscripts {subs!r}")
        perm = [subs.index(l) for l in letters if l in subs]
        if isinstance(op, Jet):
            perm = perm + [lead]
        arr = arr.transpose(perm)
        idx = tuple(slice(None) if l in subs else None for l in letters)
        if isinstance(op, Jet):
            idx = idx + (slice(None),)
        return arr[idx]

    A, B = align(a, sa), align(b, sb)
    summed = tuple(range(len(out), len(letters)))
    if isinstance(a, Jet) and isinstance(b, Jet):
        if a.dim != b.dim:
            raise ValueError("jet dimension mismatch")
        order = min(a.order, b.order)
        A, B = np.broadcast_arrays(A, B)
        c = _raw_mul(A, B, a.dim, order)
        return Jet(c.sum(axis=summed), a.dim, order)
    if isinstance(a, Jet):
        return Jet((A * B[..., None]).sum(axis=summed), a.dim, a.order)
    if isinstance(b, Jet):
        return Jet((A[..., None] * B).sum(axis=summed), b.dim, b.order)
    return np.einsum(subscripts, a, b)


def jinv(m):
    """Inverse of jet-valued square matrices (shape ``(..., n, n)``).

    Writes ``m = m0 + e`` with ``e`` free of constant terms; the Neumann
    series ``sum_k (-m0^{-1} e)^k m0^{-1}`` terminates after three terms.
    """
    n = m.shape[-1]
    m0 = m.value
    m0inv = np.linalg.inv(m0)
    e = Jet(m.c.copy(), m.dim, m.order)
    e.c[..., 0] = 0.0
    step = -jeinsum("...ij,...jk->...ik", m0inv, e)
    out = Jet.constant(m0inv, m.dim)
    out.order = m.order
    term = None
    for _ in range(m.order):
        term = step if term is None else jeinsum("...ij,...jk->...ik", step, term)
        out = out + jeinsum("...ij,...jk->...ik", term, m0inv)
    return out
