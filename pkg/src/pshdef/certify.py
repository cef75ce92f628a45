"""Boundary classification and checks for plurisubharmonic modifications.

The candidates are rho = r (1 + K r + L X).  A check returns a
:class:`CertReport`; "fail" always comes with at least one witness point, and
"inconclusive" is used whenever a finite search cannot decide (grid
exhaustion, all computed series terms vanishing).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .boundary import NormalFrame, UnsupportedOrderError, series_G
from .expansion import build_P
from .expr import Const, Node, Point, evaluate
from .geometry import CHess, Derivs, L_apply, error_B, hform, psd2
from .jets import jet_batch, jet_of

__all__ = [
    "Kind", "BoundarySample", "Region", "CertReport", "ILResult", "classify",
    "sample_boundary", "refine_weak", "detect_weak", "check_necessary_boundary",
    "check_necessary_BP", "interval_IL", "scan_psh", "check_sufficient",
    "series_necessity", "region_grid", "DEFAULT_K_GRID", "default_L_magnitudes",
]

DEFAULT_K_GRID = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 100.0)
TOL_WEAK = 1e-9
MAX_WITNESSES = 20


def default_L_magnitudes() -> tuple[float, ...]:
    # 16 magnitudes 10^(-2 + k/3); 1.0 is among them
    return tuple(float(10.0 ** (-2 + k / 3)) for k in range(16))


class Kind(str, Enum):
    STRONG = "Strong"
    WEAK = "Weak"
    NONPSEUDOCONVEX = "NonPseudoconvex"


@dataclass(frozen=True)
class BoundarySample:
    p: Point
    levi: float
    kind: Kind
    hdet_r: float
    scale: float = 1.0


@dataclass(frozen=True)
class Region:
    """Polydisc |z - z0|, |w - w0| <= radius, or a Euclidean shell around center."""

    center: Point
    radius: float
    inner: float = 0.0
    shape: str = "polydisc"  # or "ball"

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("region radius must be positive")
        if self.shape not in ("polydisc", "ball"):
            raise ValueError(f"unknown region shape {self.shape!r}")

    def contains(self, z, w):
        dz = np.abs(np.asarray(z) - self.center.z)
        dw = np.abs(np.asarray(w) - self.center.w)
        slack = 1e-12 * self.radius
        if self.shape == "polydisc":
            return (dz <= self.radius + slack) & (dw <= self.radius + slack)
        n = np.sqrt(dz ** 2 + dw ** 2)
        return (n <= self.radius + slack) & (n >= self.inner - slack)


@dataclass
class CertReport:
    condition: str
    verdict: str  # "pass" | "fail" | "inconclusive"
    witnesses: list = field(default_factory=list)  # (Point, value) pairs
    tolerances: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    children: list = field(default_factory=list)

    def __post_init__(self):
        if self.verdict not in ("pass", "fail", "inconclusive"):
            raise ValueError(f"bad verdict {self.verdict!r}")
        if self.verdict == "fail" and not self.witnesses:
            raise ValueError("a failing report needs at least one witness")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "verdict": self.verdict,
            "witnesses": [{"point": list(p.as_real()), "value": _num(v)} for p, v in self.witnesses],
            "tolerances": {k: _num(v) for k, v in self.tolerances.items()},
            "parameters": _jsonable(self.parameters),
            "notes": list(self.notes),
            "children": [c.to_dict() for c in self.children],
        }


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Point):
        return list(obj.as_real())
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, Enum):
        return obj.value
    return obj


def _point_key(p: Point):
    return p.as_real()


# ---------------------------------------------------------------------------
# classification and sampling

def _classify_arrays(r: Node, z, w, tol_weak: float):
    rd = Derivs.at(jet_batch(r, z, w, 2))
    lv = np.real(rd.zzb * np.abs(rd.w) ** 2 + rd.wwb * np.abs(rd.z) ** 2
                 - 2 * np.real(rd.zwb * np.conj(rd.z) * rd.w))
    hd = np.real(rd.zzb * rd.wwb - np.abs(rd.zwb) ** 2)
    hnorm = np.abs(rd.zzb) + np.abs(rd.wwb) + 2 * np.abs(rd.zwb)
    scale = hnorm * (np.abs(rd.z) ** 2 + np.abs(rd.w) ** 2)
    weak = np.abs(lv) <= tol_weak * scale
    nonpsc = lv < -tol_weak * scale
    return lv, hd, scale, weak, nonpsc


def classify(r: Node, p: Point, tol_weak: float = TOL_WEAK) -> BoundarySample:
    lv, hd, scale, weak, nonpsc = _classify_arrays(r, np.array([p.z]), np.array([p.w]), tol_weak)
    kind = Kind.WEAK if weak[0] else (Kind.NONPSEUDOCONVEX if nonpsc[0] else Kind.STRONG)
    return BoundarySample(p, float(lv[0]), kind, float(hd[0]), float(scale[0]))


def _eval_real(r: Node, x: np.ndarray) -> np.ndarray:
    """r at real 4-vectors stacked along the first axis."""
    return np.real(evaluate(r, x[0] + 1j * x[1], x[2] + 1j * x[3]))


def _ray_axis(r: Node, region: Region) -> int:
    c = np.array(region.center.as_real())
    offs = np.array([-0.5, 0.0, 0.5]) * region.radius
    grid = np.array(list(itertools.product(offs, repeat=4))).T + c[:, None]
    j = jet_batch(r, grid[0] + 1j * grid[1], grid[2] + 1j * grid[3], 1)
    e = np.eye(4, dtype=int)
    mags = [np.mean(np.abs(np.real(j.coeff(tuple(e[i]))))) for i in range(4)]
    return int(np.argmax(mags))


def _polish(r: Node, x: np.ndarray, axis: int, tol: float = 1e-12, iters: int = 8) -> Optional[np.ndarray]:
    x = x.copy()
    for _ in range(iters):
        j = jet_of(r, Point.from_real(*x), 1)
        val = j.value.real
        if abs(val) <= tol:
            return x
        e = [0, 0, 0, 0]
        e[axis] = 1
        slope = j.coeff(tuple(e)).real
        if slope == 0:
            return None
        x[axis] -= val / slope
    j = jet_of(r, Point.from_real(*x), 0)
    return x if abs(j.value.real) <= tol else None


def _roots_on_rays(r: Node, bases: np.ndarray, axis: int, lo: float, hi: float,
                   m: int = 65, tol: float = 1e-12) -> list[np.ndarray]:
    """Boundary points on the lines base + t e_axis, t in [lo, hi]."""
    t = np.linspace(lo, hi, m)
    nb = bases.shape[1]
    pts = np.repeat(bases[:, :, None], m, axis=2)
    pts[axis] += t[None, :]
    vals = _eval_real(r, pts.reshape(4, -1)).reshape(nb, m)
    sg = np.sign(vals)
    roots = []
    for b in range(nb):
        base = bases[:, b]

        def f(s, base=base):
            x = base.copy()
            x[axis] += s
            return float(_eval_real(r, x[:, None])[0])

        for i in range(m):
            if sg[b, i] == 0:
                x = base.copy()
                x[axis] += t[i]
                roots.append(x)
            elif i + 1 < m and sg[b, i] * sg[b, i + 1] < 0:
                s = brentq(f, t[i], t[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
                x = base.copy()
                x[axis] += s
                x = _polish(r, x, axis, tol)
                if x is not None:
                    roots.append(x)
    return roots


def sample_boundary(r: Node, region: Region, n: int, tol_weak: float = TOL_WEAK,
                    notes: Optional[list] = None) -> list[BoundarySample]:
    """Up to ``n`` classified boundary points found by root bracketing along rays.

    Rays run along the real coordinate in which r varies most over the region;
    their feet form an odd (hence centred) grid over the other three
    coordinates.  Results are sorted by coordinates.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    axis = _ray_axis(r, region)
    others = [i for i in range(4) if i != axis]
    g = max(1, int(round(n ** (1 / 3))))
    while g ** 3 > n and g > 1:
        g -= 1
    if g % 2 == 0:
        g -= 1
    c = np.array(region.center.as_real())
    R = region.radius
    offs = np.linspace(-R, R, g) if g > 1 else np.zeros(1)
    combos = np.array(list(itertools.product(offs, repeat=3))).T
    bases = np.repeat(c[:, None], combos.shape[1], axis=1)
    bases[others] += combos
    roots = _roots_on_rays(r, bases, axis, -R, R)
    if not roots:
        if notes is not None:
            notes.append("no boundary points found in region")
        return []
    X = np.array(roots).T
    z, w = X[0] + 1j * X[1], X[2] + 1j * X[3]
    keep = region.contains(z, w)
    z, w = z[keep], w[keep]
    if len(z) == 0:
        if notes is not None:
            notes.append("no boundary points found in region")
        return []
    order = np.lexsort((w.imag, w.real, z.imag, z.real))
    z, w = z[order], w[order]
    if len(z) > n:
        idx = np.unique(np.round(np.linspace(0, len(z) - 1, n)).astype(int))
        z, w = z[idx], w[idx]
    lv, hd, scale, weak, nonpsc = _classify_arrays(r, z, w, tol_weak)
    out = []
    for i in range(len(z)):
        kind = Kind.WEAK if weak[i] else (Kind.NONPSEUDOCONVEX if nonpsc[i] else Kind.STRONG)
        out.append(BoundarySample(Point(z[i], w[i]), float(lv[i]), kind, float(hd[i]), float(scale[i])))
    return out


def refine_weak(r: Node, sample: BoundarySample, region: Region, tol_weak: float = TOL_WEAK,
                min_step: float = 1e-11, max_steps: int = 2000) -> BoundarySample:
    """Move along the boundary towards a Levi-form minimum by step halving."""
    axis = _ray_axis(r, region)
    others = [i for i in range(4) if i != axis]
    best = sample
    x = np.array(sample.p.as_real())
    step = 0.05 * region.radius
    n = 0
    while step >= min_step and best.kind is not Kind.WEAK and n < max_steps:
        improved = False
        for i in others:
            for sgn in (1.0, -1.0):
                y = x.copy()
                y[i] += sgn * step
                y = _polish(r, y, axis, 1e-12, iters=30)
                n += 1
                if y is None or not region.contains(y[0] + 1j * y[1], y[2] + 1j * y[3]):
                    continue
                cand = classify(r, Point.from_real(*y), tol_weak)
                if cand.levi < best.levi:
                    best, x, improved = cand, y, True
                    break
            if improved:
                break
        if not improved:
            step *= 0.5
    return best


def detect_weak(r: Node, samples: Sequence[BoundarySample], region: Region,
                tol_weak: float = TOL_WEAK, refine: int = 4,
                refine_ratio: float = 1e-2) -> list[BoundarySample]:
    """Weak samples plus refined near-weak candidates.

    Strong samples whose levi/scale ratio is below ``refine_ratio`` (at most
    ``refine`` of them, smallest first) are pushed towards a Levi minimum.
    """
    weak = [s for s in samples if s.kind is Kind.WEAK]
    strong = [s for s in samples if s.kind is Kind.STRONG and s.scale > 0
              and s.levi / s.scale < refine_ratio]
    strong.sort(key=lambda s: (s.levi / s.scale, _point_key(s.p)))
    for s in strong[:refine]:
        t = refine_weak(r, s, region, tol_weak)
        if t.kind is Kind.WEAK and all(
                np.linalg.norm(np.subtract(t.p.as_real(), u.p.as_real())) > 1e-8 for u in weak):
            weak.append(t)
    weak.sort(key=lambda s: _point_key(s.p))
    return weak


# ---------------------------------------------------------------------------
# necessary conditions

def _samples_zw(samples):
    z = np.array([s.p.z for s in samples], dtype=complex)
    w = np.array([s.p.w for s in samples], dtype=complex)
    return z, w


def check_necessary_boundary(r: Node, X: Node, samples: Sequence[BoundarySample],
                             C_max: float = 1e6, tol: float = 1e-9) -> CertReport:
    """-H_{(1+X) r} <= C L_r on the samples for some C <= C_max."""
    tolerances = {"tol": tol, "C_max": C_max}
    if not samples:
        return CertReport("boundary_psh", "inconclusive", tolerances=tolerances,
                          notes=["no boundary samples"])
    z, w = _samples_zw(samples)
    rj = jet_batch(r, z, w, 2)
    xj = jet_batch(X, z, w, 2)
    d = Derivs.at(rj * (xj + 1.0))
    h = np.real(d.zzb * d.wwb - np.abs(d.zwb) ** 2)
    hscale = np.maximum(1.0, np.abs(d.zzb) * np.abs(d.wwb))
    witnesses, ratios = [], []
    for s, hv, hs in zip(samples, h, hscale):
        if s.kind is Kind.WEAK:
            if -hv > tol * hs:
                witnesses.append((s.p, -hv))
        elif s.kind is Kind.NONPSEUDOCONVEX:
            witnesses.append((s.p, s.levi))
        else:
            ratios.append(-hv / s.levi)
    C = max([0.0] + ratios)
    if C > C_max:
        worst = max(zip(ratios, [s for s in samples if s.kind is Kind.STRONG]), key=lambda t: t[0])
        witnesses.append((worst[1].p, worst[0]))
    verdict = "fail" if witnesses else "pass"
    return CertReport("boundary_psh", verdict, witnesses[:MAX_WITNESSES], tolerances,
                      {"C": C, "n_samples": len(samples)})


def check_necessary_BP(r: Node, P: Node, weak_samples: Sequence[BoundarySample],
                       tol: float = 1e-10) -> CertReport:
    """B_P = 0 and L_r(P) = 0 on the weak samples."""
    witnesses = []
    maxB = maxL = 0.0
    for s in weak_samples:
        rd = Derivs.at(jet_of(r, s.p, 2))
        Pd = Derivs.at(jet_of(P, s.p, 2))
        B = float(error_B(rd, Pd))
        Lp = abs(L_apply(rd, Pd))
        maxB, maxL = max(maxB, abs(B)), max(maxL, Lp)
        if abs(B) > tol or Lp > tol:
            witnesses.append((s.p, B if abs(B) > tol else Lp))
    notes = [] if weak_samples else ["no weak points in region"]
    return CertReport("B_P_vanishes_on_W", "fail" if witnesses else "pass",
                      witnesses[:MAX_WITNESSES], {"tol": tol},
                      {"max_abs_B": maxB, "max_abs_LrP": maxL, "n_weak": len(weak_samples)}, notes)


@dataclass(frozen=True)
class ILResult:
    side: str  # "negative" -> (-inf, L0); "positive" -> (-L0, inf); "empty"
    H_value: float

    @property
    def sign(self) -> float:
        return {"negative": -1.0, "positive": 1.0, "empty": 0.0}[self.side]


def interval_IL(r: Node, X: Node, p0: Point, tol: float = 1e-10) -> ILResult:
    """Side of admissible L from the sign of H_{1+X}(L_r, L_r)(p0)."""
    rd = Derivs.at(jet_of(r, p0, 2))
    Pd = Derivs.at(jet_of(build_P(X), p0, 2))
    Lr = (rd.w, -rd.z)
    H = float(np.real(hform(Pd, None, Lr, Lr)))
    if abs(H) <= tol:
        return ILResult("empty", H)
    return ILResult("negative" if H > 0 else "positive", H)


# ---------------------------------------------------------------------------
# interior scans

def region_grid(region: Region, grid_n: int, r: Optional[Node] = None, collar: float = 0.0):
    """Grid points of the region (optionally restricted to r <= collar)."""
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    c = np.array(region.center.as_real())
    ax = np.linspace(-region.radius, region.radius, grid_n)
    g = np.meshgrid(ax, ax, ax, ax, indexing="ij")
    x = [c[i] + g[i].ravel() for i in range(4)]
    z, w = x[0] + 1j * x[1], x[2] + 1j * x[3]
    keep = region.contains(z, w)
    z, w = z[keep], w[keep]
    if r is not None:
        rv = np.real(evaluate(r, z, w))
        keep = rv <= collar
        z, w = z[keep], w[keep]
    return z, w


def _hess_batch(f: Node, z, w, chunk: int = 8192) -> CHess:
    parts = []
    for i in range(0, len(z), chunk):
        d = Derivs.at(jet_batch(f, z[i:i + chunk], w[i:i + chunk], 2))
        parts.append((d.zzb, d.wwb, d.zwb))
    if not parts:
        return CHess(np.zeros(0), np.zeros(0), np.zeros(0, dtype=complex))
    return CHess(*(np.concatenate([p[k] for p in parts]) for k in range(3)))


def _psd_report(condition: str, z, w, h: CHess, tol: float, parameters: dict,
                max_witnesses: Optional[int] = MAX_WITNESSES) -> CertReport:
    a, d = np.real(h.a), np.real(h.d)
    det = np.real(h.det)
    scale = np.maximum(1.0, np.abs(a) * np.abs(d))
    ok = psd2(h, tol)
    ok = np.atleast_1d(ok)
    viol = np.maximum.reduce([-a, -d, -det / scale, np.zeros_like(a)]) if len(a) else np.zeros(0)
    bad = np.flatnonzero(~ok)
    order = sorted(bad, key=lambda i: (-viol[i], z[i].real, z[i].imag, w[i].real, w[i].imag))
    witnesses = [(Point(z[i], w[i]), float(viol[i])) for i in order[:max_witnesses]]
    params = dict(parameters)
    params.update({"n_points": int(len(a)), "n_violations": int(len(bad))})
    if len(a) == 0:
        return CertReport(condition, "inconclusive", tolerances={"psd_tol": tol},
                          parameters=params, notes=["no grid points inside the domain"])
    return CertReport(condition, "fail" if len(bad) else "pass", witnesses,
                      {"psd_tol": tol}, params)


def scan_psh(rho: Node, region: Region, grid_n: int = 9, tol: float = 1e-12,
             r: Optional[Node] = None, collar: float = 0.0,
             max_witnesses: Optional[int] = MAX_WITNESSES) -> CertReport:
    """Sylvester test of H_rho on the grid points of the region with r <= 0.

    ``r`` defaults to ``rho`` itself for the sign restriction.  Witnesses are
    sorted by violation size; ``max_witnesses=None`` keeps all of them.
    """
    z, w = region_grid(region, grid_n, r if r is not None else rho, collar)
    return _psd_report("scan_psh", z, w, _hess_batch(rho, z, w), tol, {"grid_n": grid_n},
                       max_witnesses)


class _HessianFamily:
    """H_rho for rho = r + K r^2 + L r X, linear in (K, L), on a fixed grid."""

    def __init__(self, r: Node, X: Node, z, w):
        self.z, self.w = z, w
        hs = {"r": [], "r2": [], "rX": []}
        for i in range(0, len(z), 8192):
            rj = jet_batch(r, z[i:i + 8192], w[i:i + 8192], 2)
            xj = jet_batch(X, z[i:i + 8192], w[i:i + 8192], 2)
            for key, j in (("r", rj), ("r2", rj * rj), ("rX", rj * xj)):
                d = Derivs.at(j)
                hs[key].append((d.zzb, d.wwb, d.zwb))
        self.parts = {k: tuple(np.concatenate([p[i] for p in v]) if v else np.zeros(0)
                               for i in range(3)) for k, v in hs.items()}

    def hessian(self, K: float, L: float) -> CHess:
        r, r2, rX = self.parts["r"], self.parts["r2"], self.parts["rX"]
        return CHess(*(r[i] + K * r2[i] + L * rX[i] for i in range(3)))


# ---------------------------------------------------------------------------
# sufficiency

def check_sufficient(r: Node, X: Node, p0: Point, region: Region,
                     K_grid: Iterable[float] = DEFAULT_K_GRID,
                     L_grid: Optional[Iterable[float]] = None,
                     n_samples: int = 343, grid_n: int = 9, psd_tol: float = 1e-12,
                     tol_weak: float = TOL_WEAK, C_max: float = 1e6) -> CertReport:
    """Search for (K, L) making r (1 + K r + L X) plurisubharmonic on the region.

    Conditions: (1) B_P vanishes on the weak set, (2) the side of admissible
    L is nonempty, (3) the boundary inequality holds for some admissible L.
    Candidates passing (3), together with the X-free candidates (L = 0), are
    scanned; the verdict is pass iff some candidate passes the scan.
    """
    K_grid = [float(k) for k in K_grid]
    notes: list[str] = []
    samples = sample_boundary(r, region, n_samples, tol_weak, notes)
    weak = detect_weak(r, samples, region, tol_weak)

    P = build_P(X)
    cond1 = check_necessary_BP(r, P, weak)
    il = interval_IL(r, X, p0)
    cond2 = CertReport("admissible_L_side", "pass" if il.side != "empty" else "fail",
                       [] if il.side != "empty" else [(p0, il.H_value)],
                       {"tol": 1e-10}, {"side": il.side, "H_value": il.H_value})

    mags = list(L_grid) if L_grid is not None else list(default_L_magnitudes())
    L_ok = []
    cond3_children = []
    if il.side != "empty":
        for mag in mags:
            L = il.sign * abs(float(mag))
            rep = check_necessary_boundary(r, Const(L) * X, samples, C_max)
            rep.parameters["L"] = L
            cond3_children.append(rep)
            if rep.passed:
                L_ok.append(L)
    if L_ok:
        cond3 = CertReport("boundary_psh_some_L", "pass", parameters={"L_values": L_ok},
                           children=cond3_children)
    else:
        wit = [w for c in cond3_children for w in c.witnesses][:MAX_WITNESSES] or [(p0, float("nan"))]
        cond3 = CertReport("boundary_psh_some_L", "fail", wit, children=cond3_children,
                           notes=[] if cond3_children else ["no admissible L to test"])

    z, w = region_grid(region, grid_n, r)
    fam = _HessianFamily(r, X, z, w)
    candidates = [(K, L) for L in L_ok for K in K_grid] + [(K, 0.0) for K in K_grid]
    feasible = []
    scan_witnesses = []
    scans = []
    for K, L in candidates:
        rep = _psd_report("scan_psh", z, w, fam.hessian(K, L), psd_tol, {"K": K, "L": L, "grid_n": grid_n})
        scans.append({"K": K, "L": L, "verdict": rep.verdict, "n_violations": rep.parameters["n_violations"]})
        if rep.passed:
            feasible.append([K, L])
        elif rep.witnesses:
            scan_witnesses.append(rep.witnesses[0])

    conditions_ok = cond1.passed and cond2.passed and cond3.passed
    if feasible:
        verdict = "pass"
    elif conditions_ok:
        verdict = "inconclusive"
        notes.append("conditions hold but no (K, L) on the grid passed the scan")
    else:
        verdict = "fail"
    witnesses = []
    if verdict == "fail":
        for rep in (cond1, cond2, cond3):
            witnesses.extend(rep.witnesses)
        witnesses = (scan_witnesses + witnesses)[:MAX_WITNESSES]
        if not witnesses:
            witnesses = [(p0, float("nan"))]
    params = {
        "feasible": feasible,
        "conditions": {"B_P_vanishes_on_W": cond1.verdict, "admissible_L_side": cond2.verdict,
                       "boundary_psh_some_L": cond3.verdict},
        "I_L": il.side, "H_value": il.H_value, "K_grid": K_grid,
        "L_candidates": [il.sign * abs(float(m)) for m in mags] if il.side != "empty" else [],
        "n_boundary_samples": len(samples), "n_weak": len(weak), "scans": scans,
    }
    return CertReport("sufficient", verdict, witnesses,
                      {"psd_tol": psd_tol, "tol_weak": tol_weak, "C_max": C_max},
                      params, notes, [cond1, cond2, cond3])


# ---------------------------------------------------------------------------
# higher-order necessity along normals

def _k_window(F0: float, F1: float, F2: float, sign: float):
    """Roots of sign * (F0 + K F1 + K^2 F2); bounds on K where it stays positive."""
    coeffs = [sign * F2, sign * F1, sign * F0]
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    if len(coeffs) < 2:
        return []
    roots = np.roots(coeffs)
    return sorted(float(x.real) for x in roots if abs(x.imag) < 1e-12)


def series_necessity(r: Node, P: Node, K: float, frames: Sequence[NormalFrame],
                     N_max: int = 2, tol: float = 1e-10) -> CertReport:
    """First nonvanishing G_k along each frame must satisfy (-1)^k G_k > 0."""
    if N_max > 2:
        raise UnsupportedOrderError("necessity verdicts use G_k with k <= 2 only")
    witnesses, undecided, per_frame = [], [], []
    for fr in frames:
        terms = series_G(r, P, K, fr, N_max)
        scale = max(1.0, *(abs(v) for t in terms for v in (t.F0, K * t.F1, K * K * t.F2)))
        decided = None
        for t in terms:
            if abs(t.G) > tol * scale:
                decided = t
                break
        entry = {"p": fr.p, "G": [t.G for t in terms]}
        if decided is None:
            undecided.append(fr)
            entry["N"] = None
        else:
            sgn = (-1.0) ** decided.k
            entry["N"] = decided.k
            entry["K_roots"] = _k_window(decided.F0, decided.F1, decided.F2, sgn)
            if not sgn * decided.G > 0:
                witnesses.append((fr.q, decided.G))
        per_frame.append(entry)
    if witnesses:
        verdict = "fail"
    elif undecided:
        verdict = "inconclusive"
    else:
        verdict = "pass"
    notes = []
    if undecided:
        notes.append(f"{len(undecided)} frame(s) with G_0..G_{N_max} all zero")
    return CertReport("series_necessity", verdict, witnesses[:MAX_WITNESSES],
                      {"tol": tol}, {"K": K, "N_max": N_max, "frames": per_frame}, notes)
