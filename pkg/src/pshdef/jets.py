"""Truncated multivariate Taylor polynomials ("jets") in (x1, y1, x2, y2).

z = x1 + i y1 and w = x2 + i y2.  Coefficients are complex so that Wirtinger
derivatives of real fields can be carried as jets as well.  Monomials are
stored in graded order, so the coefficients of a lower-order truncation are a
prefix of the full vector.  A jet may carry trailing batch dimensions, one
jet per evaluation point.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from math import factorial, prod

import numpy as np

from .expr import Node, Point, evaluate

__all__ = ["Jet", "JetOrderError", "jet_of", "jet_batch", "wirtinger", "monomials", "DEFAULT_ORDER"]

DEFAULT_ORDER = 4
NVARS = 4


class JetOrderError(ValueError):
    pass


@lru_cache(maxsize=None)
def monomials(order: int) -> tuple[tuple[int, int, int, int], ...]:
    out = []
    for deg in range(order + 1):
        out.extend(sorted((e for e in product(range(deg + 1), repeat=NVARS) if sum(e) == deg),
                          reverse=True))
    return tuple(out)


@lru_cache(maxsize=None)
def _index(order: int) -> dict:
    return {e: i for i, e in enumerate(monomials(order))}


@lru_cache(maxsize=None)
def _degrees(order: int) -> np.ndarray:
    return np.array([sum(e) for e in monomials(order)])


@lru_cache(maxsize=None)
def _mul_table(order: int):
    mons = monomials(order)
    idx = _index(order)
    ii, jj, kk = [], [], []
    for i, a in enumerate(mons):
        da = sum(a)
        for j, b in enumerate(mons):
            if da + sum(b) > order:
                continue
            ii.append(i)
            jj.append(j)
            kk.append(idx[tuple(x + y for x, y in zip(a, b))])
    return np.array(ii), np.array(jj), np.array(kk)


@lru_cache(maxsize=None)
def _diff_table(order: int, var: int):
    """Index map and weights for d/dx_var: order -> order - 1."""
    src_idx = _index(order)
    src, weight = [], []
    for e in monomials(order - 1):
        up = list(e)
        up[var] += 1
        src.append(src_idx[tuple(up)])
        weight.append(up[var])
    return np.array(src), np.array(weight, dtype=float)


def _ncoef(order: int) -> int:
    return len(monomials(order))


class Jet:
    """Truncated Taylor polynomial centred at a point (or a batch of points)."""

    __slots__ = ("order", "coeffs")
    __array_ufunc__ = None  # numpy operands defer to the reflected operators

    def __init__(self, order: int, coeffs):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape[0] != _ncoef(order):
            raise ValueError(f"expected {_ncoef(order)} coefficients for order {order}")
        self.order = order
        self.coeffs = coeffs

    # -- construction ------------------------------------------------------
    @classmethod
    def constant(cls, value, order: int) -> "Jet":
        value = np.asarray(value, dtype=complex)
        c = np.zeros((_ncoef(order),) + value.shape, dtype=complex)
        c[0] = value
        return cls(order, c)

    @classmethod
    def variable(cls, center, var: int, order: int) -> "Jet":
        """Jet of the real coordinate x_var (0..3) centred at ``center``."""
        j = cls.constant(center, order)
        if order >= 1:
            e = [0, 0, 0, 0]
            e[var] = 1
            j.coeffs[_index(order)[tuple(e)]] = 1.0
        return j

    @property
    def batch_shape(self) -> tuple:
        return self.coeffs.shape[1:]

    @property
    def value(self):
        v = self.coeffs[0]
        return v.item() if v.ndim == 0 else v

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetOrderError(f"cannot raise jet order {self.order} to {order}")
        return Jet(order, self.coeffs[: _ncoef(order)])

    def coeff(self, exps: tuple[int, int, int, int]):
        v = self.coeffs[_index(self.order)[tuple(exps)]]
        return v.item() if v.ndim == 0 else v

    # -- arithmetic --------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            order = min(self.order, other.order)
            return order, self.coeffs[: _ncoef(order)], other.coeffs[: _ncoef(order)]
        return None

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is not None:
            order, a, b = pair
            return Jet(order, a + b)
        c = self.coeffs.copy()
        c[0] = c[0] + other
        return Jet(self.order, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.order, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        pair = self._coerce(other)
        if pair is None:
            other = np.asarray(other)
            return Jet(self.order, self.coeffs * other)
        order, a, b = pair
        ii, jj, kk = _mul_table(order)
        terms = a[ii] * b[jj]
        n = _ncoef(order)
        if terms.ndim == 1:
            out = (np.bincount(kk, weights=terms.real, minlength=n)
                   + 1j * np.bincount(kk, weights=terms.imag, minlength=n))
            return Jet(order, out)
        batch = terms.shape[1:]
        flat = terms.reshape(len(kk), -1)
        m = flat.shape[1]
        slots = (kk[:, None] * m + np.arange(m)[None, :]).ravel()
        out = (np.bincount(slots, weights=flat.real.ravel(), minlength=n * m)
               + 1j * np.bincount(slots, weights=flat.imag.ravel(), minlength=n * m))
        return Jet(order, out.reshape((n,) + batch))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("jets support non-negative integer powers only")
        result = Jet.constant(np.ones(self.batch_shape), self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def conjugate(self) -> "Jet":
        return Jet(self.order, self.coeffs.conj())

    @property
    def real(self) -> "Jet":
        return Jet(self.order, self.coeffs.real.astype(complex))

    @property
    def imag(self) -> "Jet":
        return Jet(self.order, self.coeffs.imag.astype(complex))

    # -- differentiation ---------------------------------------------------
    def d(self, var: int) -> "Jet":
        """Real partial derivative in x_var; the order drops by one."""
        if self.order < 1:
            raise JetOrderError("cannot differentiate an order-0 jet")
        src, weight = _diff_table(self.order, var)
        w = weight.reshape((-1,) + (1,) * len(self.batch_shape))
        return Jet(self.order - 1, self.coeffs[src] * w)

    def dz(self) -> "Jet":
        return 0.5 * (self.d(0) - 1j * self.d(1))

    def dzb(self) -> "Jet":
        return 0.5 * (self.d(0) + 1j * self.d(1))

    def dw(self) -> "Jet":
        return 0.5 * (self.d(2) - 1j * self.d(3))

    def dwb(self) -> "Jet":
        return 0.5 * (self.d(2) + 1j * self.d(3))

    def partial(self, exps: tuple[int, int, int, int]):
        """Real partial derivative value at the centre."""
        return self.coeff(exps) * prod(factorial(e) for e in exps)

    def directional(self, direction, k: int):
        """k-th Taylor coefficient of s -> f(centre + s * direction)."""
        if k > self.order:
            raise JetOrderError(f"need order >= {k}, jet has order {self.order}")
        direction = [np.asarray(x, dtype=float) for x in direction]
        total = 0.0
        mons = monomials(self.order)
        for i in np.flatnonzero(_degrees(self.order) == k):
            e = mons[i]
            term = self.coeffs[i]
            for x, p in zip(direction, e):
                if p:
                    term = term * x ** p
            total = total + term
        return total

    def __repr__(self):
        return f"Jet(order={self.order}, batch={self.batch_shape}, value={self.coeffs[0]!r})"


def _as_coords(z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return z.real, z.imag, w.real, w.imag


def jet_batch(f: Node, z, w, order: int = DEFAULT_ORDER) -> Jet:
    """Jets of ``f`` at every point of the (broadcast) arrays ``z``, ``w``."""
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    x1, y1, x2, y2 = _as_coords(z, w)
    jz = Jet.variable(x1, 0, order) + 1j * Jet.variable(y1, 1, order)
    jw = Jet.variable(x2, 2, order) + 1j * Jet.variable(y2, 3, order)
    out = evaluate(f, jz, jw)
    if not isinstance(out, Jet):
        out = Jet.constant(np.broadcast_to(np.asarray(out, dtype=complex), z.shape), order)
    return out


def jet_of(f: Node, p: Point, order: int = DEFAULT_ORDER) -> Jet:
    """Jet of ``f`` at ``p``: Taylor coefficients in the real coordinates."""
    if order < 0:
        raise ValueError("order must be >= 0")
    return jet_batch(f, p.z, p.w, order)


def wirtinger(j: Jet, index: tuple[int, int, int, int]):
    """Mixed Wirtinger derivative d^a_z d^b_zb d^c_w d^d_wb of the jet at its centre."""
    a, b, c, d = index
    if a + b + c + d > j.order:
        raise JetOrderError(f"derivative of order {a + b + c + d} exceeds jet order {j.order}")
    out = j
    for op, count in ((Jet.dz, a), (Jet.dzb, b), (Jet.dw, c), (Jet.dwb, d)):
        for _ in range(count):
            out = op(out)
    return out.value
