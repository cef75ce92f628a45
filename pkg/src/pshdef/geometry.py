"""Pointwise complex-Hessian geometry of real fields on C^2.

Every operation accepts either a field AST plus a point, or a precomputed
:class:`Derivs`.  The formulas are written against plain arithmetic, so a
``Derivs`` whose entries are jets (see :meth:`Derivs.fields`) yields the
corresponding quantity as a jet, i.e. as a field that can itself be
differentiated or expanded along a ray.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, NamedTuple

import numpy as np

from .expr import Node, Point
from .jets import Jet, jet_batch, jet_of

__all__ = [
    "CVec", "CHess", "Derivs", "derivs", "cgrad", "chess", "field_L", "field_N",
    "hform", "levi", "hdet", "error_B", "error_Q", "L_apply", "psd2", "grad_norm",
    "derived_quantities", "DERIVED_NAMES",
]


class CVec(NamedTuple):
    v1: Any
    v2: Any


@dataclass(frozen=True)
class CHess:
    """Complex Hessian [[a, b], [conj(b), d]] with a = f_zzb, d = f_wwb, b = f_zwb."""

    a: Any
    d: Any
    b: Any

    @property
    def det(self):
        return self.a * self.d - (self.b * self.b.conjugate()).real


@dataclass(frozen=True)
class Derivs:
    """Value and Wirtinger derivatives up to order two of a real field.

    Entries are numbers/arrays (pointwise) or jets (derived fields).
    """

    f: Any
    z: Any
    w: Any
    zzb: Any
    wwb: Any
    zwb: Any

    @property
    def zb(self):
        return self.z.conjugate()

    @property
    def wb(self):
        return self.w.conjugate()

    @property
    def zbw(self):
        return self.zwb.conjugate()

    @classmethod
    def fields(cls, j: Jet) -> "Derivs":
        dz, dw = j.dz(), j.dw()
        return cls(j.real, dz, dw, dz.dzb().real, dw.dwb().real, dz.dwb())

    @classmethod
    def at(cls, j: Jet) -> "Derivs":
        """Values at the jet centre (the jet needs order >= 2)."""
        d = cls.fields(j.truncate(2) if j.order > 2 else j)
        return cls(*(np.real(x.value) if i in (0, 3, 4) else x.value
                     for i, x in enumerate((d.f, d.z, d.w, d.zzb, d.wwb, d.zwb))))


def derivs(f, p: Point | None = None) -> Derivs:
    if isinstance(f, Derivs):
        return f
    if isinstance(f, Jet):
        return Derivs.at(f)
    if isinstance(f, Node):
        if p is None:
            raise ValueError("a point is required when passing a field expression")
        return Derivs.at(jet_of(f, p, 2))
    raise TypeError(f"cannot take derivatives of {type(f).__name__}")


def batch_derivs(f: Node, z, w) -> Derivs:
    """Pointwise derivatives of ``f`` on arrays of points."""
    return Derivs.at(jet_batch(f, z, w, 2))


def cgrad(f, p=None) -> tuple:
    d = derivs(f, p)
    return d.z, d.w


def chess(f, p=None) -> CHess:
    d = derivs(f, p)
    return CHess(d.zzb, d.wwb, d.zwb)


def field_L(f, p=None) -> CVec:
    """Complex tangential field L_f = f_w d/dz - f_z d/dw."""
    d = derivs(f, p)
    return CVec(d.w, -d.z)


def field_N(f, p=None) -> CVec:
    """Complex normal field N_f = f_zb d/dz + f_wb d/dw."""
    d = derivs(f, p)
    return CVec(d.zb, d.wb)


def L_apply(r, P, p=None):
    """L_r(P) = r_w P_z - r_z P_w."""
    rd, Pd = derivs(r, p), derivs(P, p)
    return rd.w * Pd.z - rd.z * Pd.w


def hform(f, p, V, W):
    """H_f(V, W) = V H_f conj(W)."""
    d = derivs(f, p)
    V1, V2 = V
    W1, W2 = W
    W1c, W2c = W1.conjugate(), W2.conjugate()
    return d.zzb * V1 * W1c + d.wwb * V2 * W2c + d.zwb * V1 * W2c + d.zbw * V2 * W1c


def levi(r, p=None):
    rd = derivs(r, p)
    return (rd.zzb * (rd.w * rd.wb).real + rd.wwb * (rd.z * rd.zb).real
            - 2 * (rd.zwb * rd.zb * rd.w).real)


def hdet(f, p=None):
    return chess(f, p).det


def grad_norm(r, p=None):
    """|dr| = sqrt(|r_z|^2 + |r_w|^2)."""
    rd = derivs(r, p)
    return np.sqrt(np.abs(rd.z) ** 2 + np.abs(rd.w) ** 2)


def error_B(r, P, p=None):
    rd, Pd = derivs(r, p), derivs(P, p)
    cross = rd.z * Pd.wb + rd.wb * Pd.z
    return (4 * (rd.z * Pd.zb).real * (rd.w * Pd.wb).real
            - (cross * cross.conjugate()).real)


def error_Q(r, P, p=None):
    """Symmetric mixed pairing r_zzb P_wwb + r_wwb P_zzb - 2 Re[r_zwb P_zbw]."""
    rd, Pd = derivs(r, p), derivs(P, p)
    return rd.zzb * Pd.wwb + rd.wwb * Pd.zzb - 2 * (rd.zwb * Pd.zbw).real


def psd2(h: CHess, tol: float = 1e-12):
    """Sylvester test for a 2x2 Hermitian matrix with relative tolerance.

    Works elementwise on array-valued Hessians.
    """
    a = np.real(h.a)
    d = np.real(h.d)
    det = np.real(h.det)
    scale = np.maximum(1.0, np.abs(a) * np.abs(d))
    ok = (a >= -tol) & (d >= -tol) & (det >= -tol * scale)
    return bool(ok) if np.ndim(ok) == 0 else ok


DERIVED_NAMES = ("levi", "hdet_r", "re_hr_lr_lp", "B", "Q", "re_hp_lr_lp", "hp_lr_lr", "hdet_P")


def derived_quantities(rd: Derivs, Pd: Derivs) -> dict:
    """The building blocks of the r-power grouping of det H_rho.

    ``levi`` is H_r(L_r, L_r) (the Levi form on the boundary), ``hdet_r`` and
    ``hdet_P`` the Hessian determinants, ``re_hr_lr_lp`` = Re H_r(L_r, L_P),
    ``re_hp_lr_lp`` = Re H_P(L_r, L_P), ``hp_lr_lr`` = H_P(L_r, L_r), and
    ``B``/``Q`` the two error terms.
    """
    Lr = CVec(rd.w, -rd.z)
    LP = CVec(Pd.w, -Pd.z)
    return {
        "levi": levi(rd),
        "hdet_r": hdet(rd),
        "re_hr_lr_lp": hform(rd, None, Lr, LP).real,
        "B": error_B(rd, Pd),
        "Q": error_Q(rd, Pd),
        "re_hp_lr_lp": hform(Pd, None, Lr, LP).real,
        "hp_lr_lr": hform(Pd, None, Lr, Lr).real,
        "hdet_P": hdet(Pd),
    }
