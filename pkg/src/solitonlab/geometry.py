"""Metric geometry on a chart, evaluated on jets at batches of points.

Index layout (leading ``...`` axes are batch axes):

* metric / (0,2) tensors ``h[..., i, j]``
* connection coefficients ``gam[..., k, i, j]`` = Gamma^k_ij, i.e.
  ``nabla_{d_i} d_j = Gamma^k_ij d_k`` (no symmetry assumed)
* curvature ``R[..., l, k, i, j]`` with ``R(d_i, d_j) d_k = R^l_kij d_l``
* endomorphisms ``A[..., k, j]`` = component k of ``A(d_j)``
* (0,3) tensors ``t[..., i, j, k]`` evaluated on ``(d_i, d_j, d_k)``

Vector-field arguments are always coordinate basis fields; multilinearity
makes this exhaustive.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateMetric
from .jets import Jet, jeinsum, jinv
from .tensors import nondegeneracy_ok


def jtrace(t, subscripts):
    """``numpy.einsum`` over jet components (e.g. ``'...ikij->...jk'``)."""
    ins, out = subscripts.split("->")
    return Jet(np.einsum(f"{ins}z->{out}z", t.c), t.dim, t.order)


def check_nondegenerate(h, what="metric"):
    ok = nondegeneracy_ok(h.value)
    if not np.all(ok):
        raise DegenerateMetric(f"{what} is degenerate at {int(np.sum(~ok))} point(s)")


def inverse(h, what="metric"):
    check_nondegenerate(h, what)
    return jinv(h)


# connections ----------------------------------------------------------------


def christoffel(h, h_inv=None):
    """Levi-Civita coefficients of a nondegenerate symmetric (0,2) field."""
    if h_inv is None:
        h_inv = inverse(h)
    dh = h.grad()  # dh[..., j, l, i] = d_i h_jl
    # d_i h_jl + d_j h_il - d_l h_ij, laid out as [i, j, l]
    first = (dh.transpose(_perm(dh, (2, 0, 1))) + dh.transpose(_perm(dh, (0, 2, 1))) - dh) * 0.5
    return jeinsum("...kl,...ijl->...kij", h_inv, first)


def _perm(t, last):
    nb = t.ndim - len(last)
    return tuple(range(nb)) + tuple(nb + p for p in last)


def riemann(gam):
    """``R^l_kij = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik``."""
    dg = gam.grad()  # dg[..., l, j, k, i] = d_i G^l_jk
    t1 = dg.transpose(_perm(dg, (0, 2, 3, 1)))  # [l, k, i, j] <- d_i G^l_jk
    t2 = dg.transpose(_perm(dg, (0, 2, 1, 3)))  # [l, k, i, j] <- d_j G^l_ik
    q = jeinsum("...lim,...mjk->...lkij", gam, gam)
    return t1 - t2 + q - q.transpose(_perm(q, (0, 1, 3, 2)))


def ricci(R):
    """``Ric_jk = R^i_kij`` (trace over the first curvature slot)."""
    return jtrace(R, "...ikij->...jk")


def scalar(h_inv, ric):
    return jeinsum("...jk,...jk->...", h_inv, ric)


def torsion(gam):
    return gam - gam.transpose(_perm(gam, (0, 2, 1)))


# fields --------------------------------------------------------------------


def gradient(g_inv, f):
    return jeinsum("...ij,...j->...i", g_inv, f.grad())


def flat(g, v):
    return jeinsum("...ij,...j->...i", g, v)


def cov_deriv_vector(gam, v):
    """``A[..., k, i] = (nabla_{d_i} V)^k`` as an endomorphism."""
    dv = v.grad()  # [k, i]
    return dv + jeinsum("...kim,...m->...ki", gam, v)


def cov_deriv_02(gam, h):
    """``out[..., i, j, k] = (nabla_i h)_jk``."""
    dh = h.grad()  # [j, k, i]
    out = dh.transpose(_perm(dh, (2, 0, 1)))
    out = out - jeinsum("...mij,...mk->...ijk", gam, h)
    out = out - jeinsum("...mik,...jm->...ijk", gam, h)
    return out


def cov_deriv_11(gam, A):
    """``out[..., i, k, j] = ((nabla_i A) d_j)^k``."""
    dA = A.grad()  # [k, j, i]
    out = dA.transpose(_perm(dA, (2, 0, 1)))
    out = out + jeinsum("...kim,...mj->...ikj", gam, A)
    out = out - jeinsum("...mij,...km->...ikj", gam, A)
    return out


def second_cov_deriv_vec(gam, v):
    """``out[..., i, j, k] = (nabla^2_{d_i, d_j} V)^k``."""
    w = cov_deriv_vector(gam, v)
    dw = cov_deriv_11(gam, w)  # [i, k, j]
    return dw.transpose(_perm(dw, (0, 2, 1)))


def d_nabla(gam, h):
    """``(d h)(X,Y,Z) = (nabla_X h)(Y,Z) - (nabla_Y h)(X,Z) + h(T(X,Y), Z)``."""
    nh = cov_deriv_02(gam, h)
    out = nh - nh.transpose(_perm(nh, (1, 0, 2)))
    return out + jeinsum("...mij,...mk->...ijk", torsion(gam), h)


def hessian(gam, g, g_inv, f):
    """``Hess(X, Y) = g(nabla_X grad f, Y)``."""
    A = cov_deriv_vector(gam, gradient(g_inv, f))
    return jeinsum("...jk,...ki->...ij", g, A)


def divergence(gam, v):
    return jtrace(cov_deriv_vector(gam, v), "...ii->...")


def laplacian(gam, g_inv, f):
    return divergence(gam, gradient(g_inv, f))


def endomorphism(g_inv, h):
    """Operator ``Q`` with ``g(Q X, Y) = h(X, Y)``: ``Q^m_j = h_jl g^lm``."""
    return jeinsum("...jl,...lm->...mj", h, g_inv)


def lower_endo(g, A):
    """``g(A X, Y)`` as a (0,2) tensor ``[X, Y]``."""
    return jeinsum("...kj,...kl->...jl", A, g)


def inner_02(a, b, g_inv):
    t = jeinsum("...ik,...ij->...kj", g_inv, a)
    t = jeinsum("...jl,...kj->...kl", g_inv, t)
    return jeinsum("...kl,...kl->...", t, b)


def radial_curvature(R, g, v):
    """``out[..., i, j, k] = g(R(d_i, d_j) V, d_k)``."""
    rv = jeinsum("...lmij,...m->...lij", R, v)
    return jeinsum("...lij,...lk->...ijk", rv, g)


# scalar fields -------------------------------------------------------------


def bochner_terms(g, g_inv, gam, ric, f):
    """The four Bochner quantities at order 0; see :func:`bochner_residual`."""
    xi = gradient(g_inv, f)
    n2 = jeinsum("...i,...i->...", xi, f.grad())
    half_lap = laplacian(gam, g_inv, n2) * 0.5
    hess = hessian(gam, g, g_inv, f)
    hess_n2 = inner_02(hess, hess, g_inv)
    ric_xx = jeinsum("...i,...i->...", jeinsum("...ij,...j->...i", ric, xi), xi)
    lap = laplacian(gam, g_inv, f)
    xi_lap = jeinsum("...i,...i->...", xi, lap.grad())
    return half_lap.value, hess_n2.value, ric_xx.value, xi_lap.value


def bochner_residual(g, f, g_inv=None, gam=None, ric=None):
    """``1/2 Lap|grad f|^2 - |Hess f|^2 - Ric(grad f, grad f) - grad f(Lap f)``."""
    if g_inv is None:
        g_inv = inverse(g)
    if gam is None:
        gam = christoffel(g, g_inv)
    if ric is None:
        ric = ricci(riemann(gam))
    a, b, c, d = bochner_terms(g, g_inv, gam, ric, f)
    return a - b - c - d


# Koszul difference formulas ---------------------------------------------------


def koszul_ricci_sides(g, g_inv, gam, ric):
    """Both sides of the Koszul identity for ``nabla^Ric - nabla^g``.

    Left ``2 g(T(X,Y), QZ)``; right
    ``g((nabla_Y Q)X, Z) + g((nabla_X Q)Y, Z) - g((nabla_Z Q)X, Y)``,
    laid out ``[X, Y, Z]``.
    """
    ric_inv = inverse(ric, "Ricci tensor")
    diff = christoffel(ric, ric_inv) - gam
    Q = endomorphism(g_inv, ric)
    # g(T(X,Y), QZ) = Ric(T(X,Y), Z) for self-adjoint Q
    gQ = lower_endo(g, Q)  # gQ[z, k] = g(Q d_z, d_k)
    left = jeinsum("...kxy,...zk->...xyz", diff, gQ) * 2.0
    nQ = cov_deriv_11(gam, Q)  # [i, k, j] = ((nabla_i Q) d_j)^k
    gnQ = jeinsum("...ikj,...kl->...ijl", nQ, g)  # g((nabla_i Q) d_j, d_l)
    right = gnQ.transpose(_perm(gnQ, (1, 0, 2))) + gnQ - gnQ.transpose(_perm(gnQ, (1, 2, 0)))
    return left, right


def koszul_hessian_sides(g, g_inv, gam, f):
    """Both sides of the Koszul identity for ``nabla^Hess(f) - nabla^g``.

    Left ``2 g(T(X,Y), nabla_Z grad f)``; right
    ``g(D2_{X,Y} grad f, Z) + g(D2_{Y,Z} grad f, X) - g(D2_{Z,X} grad f, Y)``.
    """
    hess = hessian(gam, g, g_inv, f)
    diff = christoffel(hess, inverse(hess, "Hessian")) - gam
    xi = gradient(g_inv, f)
    A = cov_deriv_vector(gam, xi)
    gA = lower_endo(g, A)  # [z, k] = g(nabla_z xi, d_k)
    left = jeinsum("...kxy,...zk->...xyz", diff, gA) * 2.0
    s = second_cov_deriv_vec(gam, xi)  # [i, j, k]
    gs = jeinsum("...ijk,...kl->...ijl", s, g)  # g(D2_{i,j} xi, d_l)
    # term2[x,y,z] = gs[y,z,x]; term3[x,y,z] = gs[z,x,y]
    right = gs + gs.transpose(_perm(gs, (2, 0, 1))) - gs.transpose(_perm(gs, (1, 2, 0)))
    return left, right


# convenience context ---------------------------------------------------------


@dataclass
class MetricGeometry:
    """Lazily computed Levi-Civita quantities for a metric jet batch."""

    g: Jet

    @cached_property
    def g_inv(self):
        return inverse(self.g)

    @cached_property
    def gamma(self):
        return christoffel(self.g, self.g_inv)

    @cached_property
    def riemann(self):
        return riemann(self.gamma)

    @cached_property
    def ricci(self):
        return ricci(self.riemann)

    @cached_property
    def scal(self):
        return scalar(self.g_inv, self.ricci)

    @property
    def dim(self):
        return self.g.shape[-1]
