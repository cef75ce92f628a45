"""Grouping of det H_rho into powers of r for rho = r (K r + P), P = 1 + L X."""

from __future__ import annotations

from dataclasses import dataclass

from .expr import Const, Node, Point
from .geometry import Derivs, derived_quantities, hdet
from .jets import jet_of

__all__ = [
    "ExpansionCoeffs", "build_rho", "build_P", "coeffs", "coeffs_from_derivs",
    "residual_full", "residual_term", "TERMS",
]

TERMS = ("HessianRR", "HessianPR", "HessianA")


@dataclass(frozen=True)
class ExpansionCoeffs:
    c0: float
    c1: float
    c2: float
    evaluated_at: Point
    K: float
    r: float  # value of r at evaluated_at

    def total(self) -> float:
        return self.c0 + self.r * self.c1 + self.r ** 2 * self.c2


def build_P(X: Node, L: float = 1.0) -> Node:
    return Const(1.0) + Const(float(L)) * X


def build_rho(r: Node, X: Node, K: float, L: float) -> Node:
    """rho = r * (1 + K r + L X)."""
    return r * (Const(1.0) + Const(float(K)) * r + Const(float(L)) * X)


def coeffs_from_derivs(rd: Derivs, Pd: Derivs, K: float):
    """(c0, c1, c2) from pointwise derivatives of r and P."""
    q = derived_quantities(rd, Pd)
    P = Pd.f
    levi_q = q["levi"]
    c0 = 2 * K * P * levi_q + P * P * q["hdet_r"] + 2 * P * q["re_hr_lr_lp"] + q["B"]
    c1 = (4 * K * K * levi_q + P * q["Q"] + 2 * q["re_hp_lr_lp"] + 4 * K * P * q["hdet_r"]
          + 4 * K * q["re_hr_lr_lp"] + 2 * K * q["hp_lr_lr"])
    c2 = 4 * K * K * q["hdet_r"] + q["hdet_P"] + 2 * K * q["Q"]
    return c0, c1, c2


def coeffs(r: Node, P: Node, K: float, q: Point) -> ExpansionCoeffs:
    rd = Derivs.at(jet_of(r, q, 2))
    Pd = Derivs.at(jet_of(P, q, 2))
    c0, c1, c2 = coeffs_from_derivs(rd, Pd, K)
    return ExpansionCoeffs(float(c0), float(c1), float(c2), q, float(K), float(rd.f))


def _scale(*values) -> float:
    return max(1.0, *(abs(v) for v in values))


def residual_full(r: Node, P: Node, K: float, q: Point) -> float:
    """Scaled gap between det H_rho (computed directly) and c0 + r c1 + r^2 c2."""
    ec = coeffs(r, P, K, q)
    rho = r * (Const(float(K)) * r + P)
    direct = hdet(Derivs.at(jet_of(rho, q, 2)))
    rv = ec.r
    return abs(direct - ec.total()) / _scale(direct, ec.c0, rv * ec.c1, rv * rv * ec.c2)


def residual_term(which: str, r: Node, P: Node, K: float, q: Point) -> float:
    """Scaled residual of one of the three intermediate identities."""
    if which not in TERMS:
        raise ValueError(f"unknown term {which!r}; expected one of {TERMS}")
    rj = jet_of(r, q, 2)
    Pj = jet_of(P, q, 2)
    rd, Pd = Derivs.at(rj), Derivs.at(Pj)
    rv = rd.f
    dq = derived_quantities(rd, Pd)
    if which == "HessianRR":
        direct = hdet(Derivs.at(rj * rj))
        grouped = 4 * rv * dq["levi"] + 4 * rv * rv * dq["hdet_r"]
        parts = (4 * rv * dq["levi"], 4 * rv * rv * dq["hdet_r"])
    elif which == "HessianPR":
        direct = hdet(Derivs.at(Pj * rj))
        P = Pd.f
        parts = (P * P * dq["hdet_r"] + 2 * P * dq["re_hr_lr_lp"] + dq["B"],
                 rv * (P * dq["Q"] + 2 * dq["re_hp_lr_lp"]),
                 rv * rv * dq["hdet_P"])
        grouped = sum(parts)
    else:
        pr = Derivs.at(Pj * rj)
        r2 = Derivs.at(rj * rj)
        direct = K * (pr.zzb * r2.wwb + pr.wwb * r2.zzb - 2 * (pr.zbw * r2.zwb).real)
        P = Pd.f
        parts = (2 * K * P * dq["levi"],
                 rv * (4 * K * P * dq["hdet_r"] + 4 * K * dq["re_hr_lr_lp"] + 2 * K * dq["hp_lr_lr"]),
                 rv * rv * 2 * K * dq["Q"])
        grouped = sum(parts)
    return abs(direct - grouped) / _scale(direct, *parts)
