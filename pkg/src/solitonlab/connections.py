"""Affine connections (torsion allowed), d^nabla, duals and the statistical taxonomy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import geometry as geo
from .geometry import _perm, cov_deriv_02, cov_deriv_11, d_nabla, lower_endo, torsion
from .jets import Jet, jeinsum
from .report import DEFAULT_TOL, CheckReport, compare, discrepant, residual

ANCHOR_STATISTICAL = "is a statistical structure on"
ANCHOR_NEARLY = "nearly statistical structure on"
ANCHOR_QUASI = "quasi-statistical structure on $M$"
ANCHOR_DUAL = "said to be a dualistic structure"
ANCHOR_EQUIAFFINE = "is an equiaffine connection on"
ANCHOR_CODAZZI = "is a Codazzi tensor field"
ANCHOR_KILLING = "is a Killing tensor field"
ANCHOR_RADIAL = "if and only if the radial curvature vanishes"
ANCHOR_RADIAL_STAT = "is a statistical structure if and only if"


@dataclass(frozen=True)
class ConnectionField:
    """Coefficient field ``x -> Gamma^k_ij(x)`` (jet valued, layout ``[k, i, j]``)."""

    dim: int
    coefficients: Callable[[np.ndarray], Jet]
    kind: str = "custom"

    def at(self, x):
        return self.coefficients(np.asarray(x, dtype=float))


def levi_civita(h_field, dim, kind="levi-civita"):
    """Levi-Civita connection of a symmetric (0,2) field given as ``x -> Jet``."""

    def coeffs(x):
        return geo.christoffel(h_field(x))

    return ConnectionField(dim, coeffs, kind)


def custom_connection(dim, gamma_fn, kind="custom"):
    return ConnectionField(dim, gamma_fn, kind)


# dual connections --------------------------------------------------------------


def dual_coefficients(g, g_inv, gam):
    """``G*^m_il = g^mj (d_i g_jl - G^p_ij g_pl)``."""
    dg = g.grad()  # [j, l, i]
    a = dg.transpose(_perm(dg, (2, 0, 1)))  # [i, j, l] = d_i g_jl
    b = jeinsum("...pij,...pl->...ijl", gam, g)
    return jeinsum("...mj,...ijl->...mil", g_inv, a - b)


def dual_connection(g_field, conn):
    def coeffs(x):
        g = g_field(x)
        return dual_coefficients(g, geo.inverse(g), conn.at(x))

    return ConnectionField(conn.dim, coeffs, "dual")


def duality_defect(g, gam, gam_star):
    """``X g(Y,Z) - g(nabla_X Y, Z) - g(Y, nabla*_X Z)`` on basis triples ``[i, j, l]``."""
    dg = g.grad()
    a = dg.transpose(_perm(dg, (2, 0, 1)))
    b = jeinsum("...mij,...ml->...ijl", gam, g)
    c = jeinsum("...mil,...jm->...ijl", gam_star, g)
    return a - b - c


def duality_check(g, gam, gam_star, tol=DEFAULT_TOL):
    d = duality_defect(g, gam, gam_star)
    r = residual(d, g.value, gam.value, gam_star.value, nbatch=_nb(g, 2))
    return CheckReport("duality", ANCHOR_DUAL, r, tol)


def _nb(t, rank):
    return t.ndim - rank


# statistical taxonomy ----------------------------------------------------------


def _sym_defect(h):
    return h.value - np.swapaxes(h.value, -1, -2)


def statistical_residuals(h, gam):
    """Per-point residuals of (torsion, d^nabla h, asymmetry of h)."""
    nb = _nb(h, 2)
    t = residual(torsion(gam), gam.value, nbatch=nb)
    d = residual(d_nabla(gam, h), h.value, gam.value, nbatch=nb)
    s = residual(_sym_defect(h), h.value, nbatch=nb)
    return t, d, s


def is_statistical(h, gam, tol=DEFAULT_TOL, check_id="statistical"):
    t, d, s = statistical_residuals(h, gam)
    rep = CheckReport(check_id, ANCHOR_STATISTICAL, np.maximum(np.maximum(t, d), s), tol)
    rep.note(f"torsion={t.max():.3e} d_nabla={d.max():.3e} asym={s.max():.3e}")
    return rep


def nearly_statistical_defect(h, gam):
    """``(nabla_X h)(Y,Z) - (nabla_Y h)(X,Z)``."""
    nh = cov_deriv_02(gam, h)
    return nh - nh.transpose(_perm(nh, (1, 0, 2)))


def is_nearly_statistical(h, gam, tol=DEFAULT_TOL, check_id="nearly-statistical"):
    nb = _nb(h, 2)
    t = residual(torsion(gam), gam.value, nbatch=nb)
    s = residual(_sym_defect(h), h.value, nbatch=nb)
    n = residual(nearly_statistical_defect(h, gam), h.value, gam.value, nbatch=nb)
    return CheckReport(check_id, ANCHOR_NEARLY, np.maximum(np.maximum(t, s), n), tol)


def is_quasi_statistical(h, gam, tol=DEFAULT_TOL, check_id="quasi-statistical"):
    r = residual(d_nabla(gam, h), h.value, gam.value, nbatch=_nb(h, 2))
    return CheckReport(check_id, ANCHOR_QUASI, r, tol)


# equiaffine / self-adjointness -------------------------------------------------------


def ricci_asymmetry(ric):
    return ric.value - np.swapaxes(ric.value, -1, -2)


def is_equiaffine(gam, tol=DEFAULT_TOL, check_id="equiaffine"):
    ric = geo.ricci(geo.riemann(gam))
    r = residual(ricci_asymmetry(ric), ric.value, nbatch=_nb(ric, 2))
    return CheckReport(check_id, ANCHOR_EQUIAFFINE, r, tol)


def self_adjoint_defect(g, A):
    """``g(A X, Y) - g(X, A Y)`` on basis pairs."""
    gA = lower_endo(g, A).value
    return gA - np.swapaxes(gA, -1, -2)


def self_adjoint_check(g, A):
    """Per-point normalised self-adjointness residual."""
    gA = lower_endo(g, A).value
    return residual(gA - np.swapaxes(gA, -1, -2), gA, nbatch=_nb(g, 2))


# Codazzi / Killing / Omega lemma ---------------------------------------------------


def codazzi_defect(gam, J):
    """``out[i, j, k] = ((nabla_i J) d_j - (nabla_j J) d_i)^k``."""
    nJ = cov_deriv_11(gam, J)  # [i, k, j]
    a = nJ.transpose(_perm(nJ, (0, 2, 1)))  # [i, j, k]
    return a - a.transpose(_perm(a, (1, 0, 2)))


def killing_defect(gam, J):
    nJ = cov_deriv_11(gam, J)
    a = nJ.transpose(_perm(nJ, (0, 2, 1)))
    return a + a.transpose(_perm(a, (1, 0, 2)))


def codazzi_check(J, g, gam=None):
    gam = geo.christoffel(g) if gam is None else gam
    return residual(codazzi_defect(gam, J), J.value, nbatch=_nb(J, 2))


def killing_check(J, g, gam=None):
    gam = geo.christoffel(g) if gam is None else gam
    return residual(killing_defect(gam, J), J.value, nbatch=_nb(J, 2))


def omega_codazzi_sides(J, g, gam):
    """Both sides of the Omega = g(J., .) Codazzi lemma, layout ``[X, Y, Z]``.

    left  = (nabla_X Omega)(Y,Z) - (nabla_Y Omega)(X,Z)
    right = (nabla_X g)(JY,Z) - (nabla_Y g)(JX,Z) + g((nabla_X J)Y - (nabla_Y J)X, Z)
    """
    omega = lower_endo(g, J)
    left = nearly_statistical_defect(omega, gam)
    ng = cov_deriv_02(gam, g)  # [x, a, z] = (nabla_x g)(d_a, d_z)
    t = jeinsum("...xaz,...ay->...xyz", ng, J)  # (nabla_X g)(J d_y, d_z)
    right = t - t.transpose(_perm(t, (1, 0, 2)))
    right = right + jeinsum("...ijk,...kl->...ijl", codazzi_defect(gam, J), g)
    return left, right


def omega_codazzi_lemma_check(J, g, gam, tol=DEFAULT_TOL):
    left, right = omega_codazzi_sides(J, g, gam)
    nb = _nb(J, 2)
    rep = CheckReport("omega-codazzi-lemma", ANCHOR_CODAZZI, compare(left, right, nb), tol)
    return rep


def codazzi_killing_parallel_identity(J, g, gam=None):
    """Residual of ``nabla J = (Killing + Codazzi) / 2``; both zero forces ``nabla J = 0``."""
    gam = geo.christoffel(g) if gam is None else gam
    nJ = cov_deriv_11(gam, J)
    a = nJ.transpose(_perm(nJ, (0, 2, 1)))
    half = (killing_defect(gam, J) + codazzi_defect(gam, J)) * 0.5
    return compare(a, half, _nb(J, 2))


# radial curvature ------------------------------------------------------------------


def radial_identity_sides(g, gam, f):
    """``d^nabla Hess(f)`` and its curvature expansion, layout ``[X, Y, Z]``.

    Returns ``(dH, rad, extra)`` with
    ``dH = rad + extra``, ``rad = g(R(X,Y)grad f, Z)`` and
    ``extra = (nabla_X g)(nabla_Y grad f, Z) - (nabla_Y g)(nabla_X grad f, Z)``
    (zero for metric connections).
    """
    g_inv = geo.inverse(g)
    xi = geo.gradient(g_inv, f)
    dH = d_nabla(gam, geo.hessian(gam, g, g_inv, f))
    rad = geo.radial_curvature(geo.riemann(gam), g, xi)
    t = jeinsum("...xaz,...ay->...xyz", cov_deriv_02(gam, g), geo.cov_deriv_vector(gam, xi))
    return dH, rad, t - t.transpose(_perm(t, (1, 0, 2)))


def radial_identity_check(g, f, tol=DEFAULT_TOL):
    """``d^g Hess(f) = g(R(.,.)grad f, .)`` for the Levi-Civita connection."""
    dH, rad, _ = radial_identity_sides(g, geo.christoffel(g), f)
    rep = CheckReport("radial-identity-g", ANCHOR_RADIAL, compare(dH, rad, _nb(g, 2)), tol)
    rep.note(f"max |d Hess| {np.abs(dH.value).max():.3e}; max |radial| {np.abs(rad.value).max():.3e}")
    return rep


def radial_statistical_check(g, gam, f, tol=DEFAULT_TOL, check_id="radial-identity-stat"):
    """Stated form ``d^nabla Hess(f) = g(R^nabla(.,.)grad f, .)`` for a statistical ``(g, nabla)``.

    The alternative is the full expansion that keeps the ``nabla g`` terms;
    it holds for every torsion-free connection.
    """
    nb = _nb(g, 2)
    dH, rad, extra = radial_identity_sides(g, gam, f)
    stated = compare(dH, rad, nb)
    full = compare(dH, rad + extra, nb)
    rep = discrepant(check_id, ANCHOR_RADIAL_STAT, stated, full, tol)
    rep.note(f"full expansion residual {full.max():.3e}; dropped nabla-g terms max {np.abs(extra.value).max():.3e}")
    return rep
