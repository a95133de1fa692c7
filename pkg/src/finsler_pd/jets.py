"""Truncated multivariate Taylor arithmetic (forward-mode AD of arbitrary order).

A :class:`Jet` stores the Taylor coefficients ``c_a = d^a f / a!`` of a
function of ``dim`` seeded variables, for every multi-index ``a`` of total
degree ``<= order``.  Arithmetic propagates the coefficients exactly up to
the truncation order, so a single jet of order ``K`` carries every mixed
partial derivative up to order ``K``.  Differentiating a jet drops one order.

Order-2 jets are the ``Jet2`` workhorse (value, gradient, Hessian); the
curvature pipeline simply runs the same arithmetic at higher order.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np

__all__ = [
    "Jet",
    "seed",
    "sqrt",
    "log",
    "exp",
    "sin",
    "cos",
    "tan",
    "atanh",
    "value_of",
]


def _monomials(dim: int, order: int) -> list[tuple[int, ...]]:
    # graded ordering: truncating to a lower order is a prefix slice
    out = []
    for deg in range(order + 1):
        for combo in combinations_with_replacement(range(dim), deg):
            alpha = [0] * dim
            for j in combo:
                alpha[j] += 1
            out.append(tuple(alpha))
    return out


@lru_cache(maxsize=None)
def _basis(dim: int, order: int):
    monos = _monomials(dim, order)
    index = {m: i for i, m in enumerate(monos)}
    return monos, index


@lru_cache(maxsize=None)
def _product_table(dim: int, order: int):
    monos, index = _basis(dim, order)
    degs = [sum(m) for m in monos]
    I, J, T = [], [], []
    for i, a in enumerate(monos):
        for j, b in enumerate(monos):
            if degs[i] + degs[j] > order:
                continue
            I.append(i)
            J.append(j)
            T.append(index[tuple(x + y for x, y in zip(a, b))])
    return np.array(I), np.array(J), np.array(T)


@lru_cache(maxsize=None)
def _deriv_table(dim: int, order: int, var: int):
    monos, index = _basis(dim, order)
    low, _ = _basis(dim, order - 1)
    src = np.empty(len(low), dtype=int)
    fac = np.empty(len(low))
    for k, a in enumerate(low):
        up = list(a)
        up[var] += 1
        src[k] = index[tuple(up)]
        fac[k] = up[var]
    return src, fac


@lru_cache(maxsize=None)
def _size(dim: int, order: int) -> int:
    return math.comb(dim + order, order)


class Jet:
    """Truncated Taylor polynomial in ``dim`` variables up to total ``order``."""

    __slots__ = ("coef", "dim", "order")
    __array_priority__ = 1000

    def __init__(self, coef: np.ndarray, dim: int, order: int):
        self.coef = coef
        self.dim = dim
        self.order = order

    @classmethod
    def constant(cls, c: float, dim: int, order: int) -> "Jet":
        coef = np.zeros(_size(dim, order))
        coef[0] = c
        return cls(coef, dim, order)

    # -- views -----------------------------------------------------------
    @property
    def value(self) -> float:
        return float(self.coef[0])

    @property
    def grad(self) -> np.ndarray:
        if self.order < 1:
            raise ValueError("gradient needs order >= 1")
        return self.coef[1 : 1 + self.dim].copy()

    @property
    def hess(self) -> np.ndarray:
        if self.order < 2:
            raise ValueError("Hessian needs order >= 2")
        d = self.dim
        H = np.empty((d, d))
        k = 1 + d
        for i in range(d):
            for j in range(i, d):
                c = self.coef[k]
                H[i, j] = H[j, i] = 2.0 * c if i == j else c
                k += 1
        return H

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.coef[: _size(self.dim, order)], self.dim, order)

    def diff(self, var: int) -> "Jet":
        """Partial derivative in seeded variable ``var``; result has order - 1."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        src, fac = _deriv_table(self.dim, self.order, var)
        return Jet(self.coef[src] * fac, self.dim, self.order - 1)

    # -- arithmetic ------------------------------------------------------
    def _align(self, other: "Jet") -> tuple[np.ndarray, np.ndarray, int]:
        if self.order == other.order:
            return self.coef, other.coef, self.order
        k = min(self.order, other.order)
        m = _size(self.dim, k)
        return self.coef[:m], other.coef[:m], k

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b, k = self._align(other)
            return Jet(a + b, self.dim, k)
        coef = self.coef.copy()
        coef[0] += other
        return Jet(coef, self.dim, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.coef, self.dim, self.order)

    def __sub__(self, other):
        if isinstance(other, Jet):
            a, b, k = self._align(other)
            return Jet(a - b, self.dim, k)
        coef = self.coef.copy()
        coef[0] -= other
        return Jet(coef, self.dim, self.order)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b, k = self._align(other)
            if k == 0:
                return Jet(a * b, self.dim, 0)
            I, J, T = _product_table(self.dim, k)
            coef = np.bincount(T, weights=a[I] * b[J], minlength=a.size)
            return Jet(coef, self.dim, k)
        return Jet(self.coef * other, self.dim, self.order)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        a0 = self.coef[0]
        if a0 == 0.0:
            raise ZeroDivisionError("jet reciprocal at zero value")
        derivs = [(-1.0) ** k / a0 ** (k + 1) for k in range(self.order + 1)]
        return self._compose(derivs)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.coef / other, self.dim, self.order)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, int) and p >= 0:
            out = Jet.constant(1.0, self.dim, self.order)
            base = self
            while p:
                if p & 1:
                    out = out * base
                base = base * base
                p >>= 1
            return out
        a0 = self.coef[0]
        derivs = []
        c = 1.0
        for k in range(self.order + 1):
            derivs.append(c * a0 ** (p - k))
            c *= (p - k) / (k + 1)
        return self._compose(derivs)

    def _compose(self, derivs) -> "Jet":
        """f(self) given normalised Taylor coefficients f^(k)(a0)/k!."""
        h = Jet(self.coef.copy(), self.dim, self.order)
        h.coef[0] = 0.0
        out = Jet.constant(derivs[-1], self.dim, self.order)
        for c in reversed(derivs[:-1]):
            out = out * h + c
        return out

    def __repr__(self) -> str:
        return f"Jet(value={self.value!r}, dim={self.dim}, order={self.order})"


def seed(point, order: int = 2) -> list[Jet]:
    """Coordinate jets ``z_j = point_j + e_j`` for a point in R^dim."""
    point = np.asarray(point, dtype=float)
    dim = point.size
    out = []
    for j in range(dim):
        coef = np.zeros(_size(dim, order))
        coef[0] = point[j]
        if order >= 1:
            coef[1 + j] = 1.0
        out.append(Jet(coef, dim, order))
    return out


def value_of(v) -> float:
    return v.value if isinstance(v, Jet) else float(v)


def _series(f_derivs):
    """Build a function acting on floats and jets from a derivative generator."""

    def wrap(fn_float):
        def f(v):
            if isinstance(v, Jet):
                a0 = float(v.coef[0])
                return v._compose(f_derivs(a0, v.order))
            return fn_float(v)

        f.__name__ = fn_float.__name__
        return f

    return wrap


def _sqrt_derivs(a0, K):
    if a0 <= 0.0:
        raise ValueError("sqrt of a non-positive jet")
    out, c = [], 1.0
    for k in range(K + 1):
        out.append(c * a0 ** (0.5 - k))
        c *= (0.5 - k) / (k + 1)
    return out


def _log_derivs(a0, K):
    if a0 <= 0.0:
        raise ValueError("log of a non-positive jet")
    return [math.log(a0)] + [(-1.0) ** (k - 1) / (k * a0**k) for k in range(1, K + 1)]


def _exp_derivs(a0, K):
    e = math.exp(a0)
    return [e / math.factorial(k) for k in range(K + 1)]


def _sin_derivs(a0, K):
    cyc = [math.sin(a0), math.cos(a0), -math.sin(a0), -math.cos(a0)]
    return [cyc[k % 4] / math.factorial(k) for k in range(K + 1)]


def _cos_derivs(a0, K):
    cyc = [math.cos(a0), -math.sin(a0), -math.cos(a0), math.sin(a0)]
    return [cyc[k % 4] / math.factorial(k) for k in range(K + 1)]




def _tan_derivs(a0, K):
    # d/dx P(tan x) = P'(t)(1 + t^2)
    t0 = math.tan(a0)
    p = np.polynomial.Polynomial([0.0, 1.0])
    sec2 = np.polynomial.Polynomial([1.0, 0.0, 1.0])
    out = []
    for k in range(K + 1):
        out.append(p(t0) / math.factorial(k))
        p = p.deriv() * sec2
    return out


def _atanh_derivs(a0, K):
    if abs(a0) >= 1.0:
        raise ValueError("atanh outside (-1, 1)")
    # atanh'(x) = 1/(1-x^2) = (1/2)(1/(1-x) + 1/(1+x))
    out = [math.atanh(a0)]
    for k in range(1, K + 1):
        m = k - 1
        d = 0.5 * math.factorial(m) * (1.0 / (1 - a0) ** (m + 1) + (-1.0) ** m / (1 + a0) ** (m + 1))
        out.append(d / math.factorial(k))
    return out


@_series(_sqrt_derivs)
def sqrt(v):
    return math.sqrt(v)


@_series(_log_derivs)
def log(v):
    return math.log(v)


@_series(_exp_derivs)
def exp(v):
    return math.exp(v)


@_series(_sin_derivs)
def sin(v):
    return math.sin(v)


@_series(_cos_derivs)
def cos(v):
    return math.cos(v)


@_series(_tan_derivs)
def tan(v):
    return math.tan(v)


@_series(_atanh_derivs)
def atanh(v):
    return math.atanh(v)
