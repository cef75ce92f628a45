"""Normal projection onto {r = 0}, the u-factor, and normal Taylor coefficients.

Along the inward real normal through a boundary point p a query point is
q = p + s N_r(p) with s = -d / |dr(p)| <= 0, where N_r(p) = (r_zb, r_wb) is
read as a displacement in C^2.  A_k(f) is the k-th Taylor coefficient of
s -> f(p + s N_r(p)); the u-factor is u(q) = s / r(q), so that
f(q) = sum_k A_k(f) (u r)^k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from numpy.polynomial import chebyshev as C

from .expr import Node, Point, degree, eval_field, evaluate
from .geometry import DERIVED_NAMES, Derivs, derived_quantities
from .jets import Jet, jet_batch, jet_of

__all__ = [
    "NormalFrame", "SeriesTerms", "ProjectionError", "VanishingGradientError",
    "ExteriorPointError", "NotOnBoundaryError", "FitError", "UnsupportedOrderError",
    "project", "u_factor", "normal_direction", "taylor_A", "taylor_A_fit",
    "series_G", "series_sum", "field_values", "empirical_order", "frame_at",
    "curvature_radius",
]


class ProjectionError(RuntimeError):
    pass


class VanishingGradientError(ProjectionError):
    pass


class ExteriorPointError(ValueError):
    pass


class NotOnBoundaryError(ValueError):
    pass


class FitError(RuntimeError):
    pass


class UnsupportedOrderError(ValueError):
    pass


@dataclass(frozen=True)
class NormalFrame:
    p: Point
    q: Point
    d: float
    u: float
    grad_norm: float
    r_q: float
    iterations: int = 0

    @property
    def s(self) -> float:
        """Signed normal parameter -d/|dr(p)|."""
        return -self.d / self.grad_norm


@dataclass(frozen=True)
class SeriesTerms:
    k: int
    G: float
    F0: float
    F1: float
    F2: float


def _to_vec(p: Point) -> np.ndarray:
    return np.array(p.as_real())


def _to_point(x) -> Point:
    return Point.from_real(*map(float, x))


def _grad_hess(r: Node, x: np.ndarray):
    j = jet_of(r, _to_point(x), 2)
    val = j.value.real
    e = np.eye(4, dtype=int)
    g = np.array([j.coeff(tuple(e[i])).real for i in range(4)])
    H = np.empty((4, 4))
    for i in range(4):
        for k in range(4):
            H[i, k] = j.partial(tuple(e[i] + e[k])).real
    return val, g, H


def curvature_radius(r: Node, p: Point) -> float:
    """|grad r| / ||Hess r||_2 at p; infinite for flat boundaries."""
    _, g, H = _grad_hess(r, _to_vec(p))
    hn = np.linalg.norm(H, 2)
    return math.inf if hn == 0 else float(np.linalg.norm(g) / hn)


def normal_direction(r: Node, p: Point) -> np.ndarray:
    """N_r(p) = (r_zb, r_wb) as a real 4-vector (equal to grad r / 2)."""
    rd = Derivs.at(jet_of(r, p, 2))
    return np.array([rd.zb.real, rd.zb.imag, rd.wb.real, rd.wb.imag])


def project(r: Node, q: Point, tol: float = 1e-12, max_iter: int = 50,
            tube: float = 1.0) -> NormalFrame:
    """Closest boundary point to ``q`` and the associated normal frame.

    Damped Newton on the Lagrange system x - q + lam grad r(x) = 0, r(x) = 0,
    seeded by a few gradient-projection steps.  Foot points further than
    ``tube`` times the local curvature radius are refused.
    """
    qv = _to_vec(q)
    x = qv.copy()
    rq = eval_field(r, q)
    if rq > tol:
        raise ExteriorPointError(f"query point lies outside the domain (r = {rq:.3e})")

    it = 0
    for _ in range(8):
        val, g, _ = _grad_hess(r, x)
        gg = g @ g
        if gg == 0:
            raise VanishingGradientError(f"grad r vanishes at {_to_point(x)}")
        if abs(val) <= tol:
            break
        x = x - val * g / gg
        it += 1
    val, g, H = _grad_hess(r, x)
    lam = -((x - qv) @ g) / (g @ g)

    def residual(x, lam, val, g):
        return np.concatenate([x - qv + lam * g, [val]])

    F = residual(x, lam, val, g)
    converged = False
    for _ in range(max_iter):
        gn = np.linalg.norm(g)
        if gn == 0:
            raise VanishingGradientError(f"grad r vanishes at {_to_point(x)}")
        tangential = (x - qv) - ((x - qv) @ g) / gn ** 2 * g
        if abs(val) <= tol and np.linalg.norm(tangential) <= tol * max(1.0, np.linalg.norm(x - qv)):
            converged = True
            break
        J = np.zeros((5, 5))
        J[:4, :4] = np.eye(4) + lam * H
        J[:4, 4] = g
        J[4, :4] = g
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise ProjectionError("singular Newton system") from exc
        t = 1.0
        fn = np.linalg.norm(F)
        while True:
            xn, ln = x + t * step[:4], lam + t * step[4]
            valn, gn_, Hn = _grad_hess(r, xn)
            Fn = residual(xn, ln, valn, gn_)
            if np.linalg.norm(Fn) < fn or t < 1e-6:
                break
            t *= 0.5
        x, lam, val, g, H, F = xn, ln, valn, gn_, Hn, Fn
        it += 1
    if not converged:
        raise ProjectionError(f"no convergence after {max_iter} iterations")

    p = _to_point(x)
    gnorm_real = np.linalg.norm(g)
    d = float(np.linalg.norm(qv - x))
    R = np.linalg.norm(H, 2)
    if R > 0 and d >= tube * gnorm_real / R:
        raise ProjectionError(f"distance {d:.3g} exceeds the tube radius at the foot point")
    grad_norm = 0.5 * gnorm_real  # |dr| = |grad r| / 2
    if d > 0 and (qv - x) @ g > 0:
        raise ExteriorPointError("query point lies on the exterior side of the boundary")
    if rq < -tol:
        u = (d / grad_norm) / (-rq)
    else:
        # boundary query: u takes its limiting value 1 / (2 |dr|^2)
        d = 0.0
        u = 1.0 / (2.0 * grad_norm ** 2)
    return NormalFrame(p=p, q=q, d=d, u=float(u), grad_norm=float(grad_norm), r_q=rq, iterations=it)


def frame_at(r: Node, p: Point, s: float) -> NormalFrame:
    """Frame for q = p + s N_r(p) with s <= 0, built without projection."""
    n = normal_direction(r, p)
    gnorm = float(np.linalg.norm(n))
    qv = _to_vec(p) + s * n
    q = _to_point(qv)
    rq = eval_field(r, q)
    d = abs(s) * gnorm
    if s == 0:
        u = 1.0 / (2.0 * gnorm ** 2)
    else:
        if rq >= 0:
            raise ExteriorPointError("point on the normal ray is not interior")
        u = (d / gnorm) / (-rq)
    return NormalFrame(p=p, q=q, d=d, u=float(u), grad_norm=gnorm, r_q=rq)


def u_factor(frame: NormalFrame) -> float:
    """u = (d / |dr(p)|) / (-r(q)) for interior queries."""
    if not frame.r_q < 0:
        raise ExteriorPointError("u is only defined for interior query points")
    return (frame.d / frame.grad_norm) / (-frame.r_q)


FieldSpec = Union[Node, str]


def _field_jet(r: Node, f: FieldSpec, p: Point, P: Optional[Node], order: int) -> Jet:
    if isinstance(f, Node):
        return jet_of(f, p, order)
    if f == "r":
        return jet_of(r, p, order)
    if f in ("levi", "hdet_r", "hdet"):
        Pj = None
    elif f in DERIVED_NAMES:
        if P is None:
            raise ValueError(f"derived field {f!r} needs P")
        Pj = jet_of(P, p, order + 2)
    else:
        raise ValueError(f"unknown field {f!r}")
    rd = Derivs.fields(jet_of(r, p, order + 2))
    Pd = Derivs.fields(Pj) if Pj is not None else rd
    name = "hdet_r" if f == "hdet" else f
    out = derived_quantities(rd, Pd)[name]
    return out.real


def _check_boundary(r: Node, p: Point, tol: float):
    rv = eval_field(r, p)
    if abs(rv) > tol:
        raise NotOnBoundaryError(f"|r(p)| = {abs(rv):.3e} exceeds {tol:g}")


def taylor_A(r: Node, f: FieldSpec, p: Point, k: int, P: Optional[Node] = None,
             tol: float = 1e-10) -> float:
    """Analytic normal Taylor coefficient A_k(f) at a boundary point, k <= 2.

    A_0 = f(p), A_1 = 2 Re[N_r f](p), A_2 = Re[N_r N_r f](p) + (Nbar_r N_r f)(p),
    with the coefficients of N_r frozen at p.  ``f`` is a field AST, ``"r"``,
    or the name of a derived quantity (``levi``, ``hdet``, ``B``, ...).
    """
    if k not in (0, 1, 2):
        raise UnsupportedOrderError("analytic A_k is available for k <= 2; use taylor_A_fit")
    _check_boundary(r, p, tol)
    j = _field_jet(r, f, p, P, k)
    if j.order < k:
        raise UnsupportedOrderError(f"jet order {j.order} is too low for A_{k}")
    return float(np.real(j.directional(normal_direction(r, p), k)))


def field_values(r: Node, f: FieldSpec, z, w, P: Optional[Node] = None) -> np.ndarray:
    """Values of ``f`` (AST or derived-field name) on arrays of points."""
    if f == "r":
        f = r
    if isinstance(f, Node):
        return np.real(np.broadcast_to(evaluate(f, z, w), np.shape(z)))
    rd = Derivs.at(jet_batch(r, z, w, 2))
    Pd = Derivs.at(jet_batch(P, z, w, 2)) if P is not None else rd
    name = "hdet_r" if f == "hdet" else f
    if name not in DERIVED_NAMES:
        raise ValueError(f"unknown field {f!r}")
    return np.real(derived_quantities(rd, Pd)[name])


def _degree_bound(r: Node, f: FieldSpec, P: Optional[Node]) -> int:
    if isinstance(f, Node):
        return degree(f)
    dr = degree(r)
    if f == "r":
        return dr
    dP = degree(P) if P is not None else dr
    return 2 * dr + 2 * dP


def taylor_A_fit(r: Node, f: FieldSpec, p: Point, kmax: int, samples: Optional[int] = None,
                 P: Optional[Node] = None, depth: Optional[float] = None,
                 cond_max: float = 1e10, tol: float = 1e-10) -> list[float]:
    """A_0..A_kmax by least squares on interior points of the normal ray.

    Samples sit at Chebyshev nodes of s in [-h, 0); the fit degree is the
    polynomial degree bound of the field (fields here are polynomials, so the
    fit reproduces the Taylor coefficients up to rounding).
    """
    _check_boundary(r, p, tol)
    n = normal_direction(r, p)
    gnorm = float(np.linalg.norm(n))
    if gnorm == 0:
        raise VanishingGradientError("grad r vanishes at the base point")
    deg = max(kmax, min(_degree_bound(r, f, P), 40))
    if samples is None:
        samples = 2 * deg + 1
    if samples < kmax + 3:
        raise FitError(f"need at least {kmax + 3} samples for kmax = {kmax}")
    deg = min(deg, samples - 1)
    if depth is None:
        R = curvature_radius(r, p)
        depth = min(0.2 * R, 0.1)
    h = depth / gnorm
    nodes = np.cos(np.pi * (np.arange(samples) + 0.5) / samples)  # in (-1, 1)
    x = nodes
    s = 0.5 * h * (x - 1.0)  # maps (-1, 1) onto (-h, 0)
    pts = _to_vec(p)[:, None] + n[:, None] * s[None, :]
    z = pts[0] + 1j * pts[1]
    w = pts[2] + 1j * pts[3]
    y = field_values(r, f, z, w, P)
    V = C.chebvander(x, deg)
    if np.linalg.cond(V) > cond_max:
        raise FitError("ill-conditioned normal-ray fit")
    c, *_ = np.linalg.lstsq(V, y, rcond=None)
    # Taylor coefficients at s = 0 (x = 1): A_k = (2/h)^k p^(k)(1) / k!
    out = []
    ck = c
    for k in range(kmax + 1):
        val = C.chebval(1.0, ck) if len(ck) else 0.0
        out.append(float(val * (2.0 / h) ** k / math.factorial(k)))
        ck = C.chebder(ck) if len(ck) > 1 else np.zeros(0)
    return out


def _A_table(r: Node, P: Node, p: Point, kmax: int) -> dict:
    n = normal_direction(r, p)
    rd = Derivs.fields(jet_of(r, p, kmax + 2))
    Pd = Derivs.fields(jet_of(P, p, kmax + 2))
    q = derived_quantities(rd, Pd)
    return {name: [float(np.real(q[name].directional(n, k))) for k in range(kmax + 1)]
            for name in DERIVED_NAMES}


def series_G(r: Node, P: Node, K: float, frame: NormalFrame, kmax: int = 2) -> list[SeriesTerms]:
    """Coefficients G_k = F0_k + K F1_k + K^2 F2_k of r^k for k <= kmax.

    A-coefficients are taken at the foot point, P and u at the query point.
    """
    if kmax > 2:
        raise UnsupportedOrderError("series terms are available for kmax <= 2")
    A = _A_table(r, P, frame.p, kmax)
    Pq = eval_field(P, frame.q)
    u = frame.u

    def a(name, j):
        return A[name][j] * u ** j if j >= 0 else 0.0

    out = []
    for k in range(kmax + 1):
        F0 = (Pq * Pq * a("hdet_r", k) + 2 * Pq * a("re_hr_lr_lp", k) + a("B", k)
              + Pq * a("Q", k - 1) + 2 * a("re_hp_lr_lp", k - 1) + a("hdet_P", k - 2))
        F1 = (2 * Pq * a("levi", k) + 4 * Pq * a("hdet_r", k - 1) + 4 * a("re_hr_lr_lp", k - 1)
              + 2 * a("hp_lr_lr", k - 1) + 2 * a("Q", k - 2))
        F2 = 4 * a("levi", k - 1) + 4 * a("hdet_r", k - 2)
        out.append(SeriesTerms(k, F0 + K * F1 + K * K * F2, F0, F1, F2))
    return out


def series_sum(terms: Sequence[SeriesTerms], r_value: float) -> float:
    return sum(t.G * r_value ** t.k for t in terms)


def empirical_order(depths: Sequence[float], errors: Sequence[float], floor: float = 0.0) -> float:
    """Log-log slope of error against depth, ignoring errors at or below ``floor``.

    Returns +inf when every error sits at the floor (nothing left to fit).
    """
    depths = np.asarray(depths, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = errors > floor
    if keep.sum() < 2:
        return math.inf
    slope, _ = np.polyfit(np.log(depths[keep]), np.log(errors[keep]), 1)
    return float(slope)
