"""Projective parameters: y'' + Q y = 0, Schwarzian derivatives, Moebius maps.

Sign convention: the Wronskian is ``W(y1, y2) = y1' y2 - y1 y2'`` so that
``p = y1/y2`` has ``p' = W / y2**2``.  The canonical pair starts from
``y1 = (0, 1)`` and ``y2 = (1, 0)`` which gives ``W = 1``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from . import jets
from .errors import CriticalPoint, DegenerateCoefficients, GridMismatch

# 7-point central stencils
_D1 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
_D2 = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0
_D3 = np.array([1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0]) / 8.0

CRITICAL_TOL = 1e-10
ZERO_TOL = 1e-10


@dataclass(frozen=True)
class LinearOdeSolution:
    s_grid: np.ndarray
    y_samples: np.ndarray
    yp_samples: np.ndarray
    init: tuple[float, float]
    anchor: int = 0
    # running product of RK4 step determinants, anchored at 1 at ``anchor``;
    # by Abel's identity W(s) = W(anchor) * abel[s] for any pair on this grid
    abel: np.ndarray | None = None

    def at(self, s: float) -> float:
        """Cubic Hermite interpolant of y(s)."""
        return float(_hermite(self.s_grid, self.y_samples, self.yp_samples, s))

    def zeros(self) -> list[float]:
        return sign_change_zeros(self.s_grid, self.y_samples, self.yp_samples)


def _hermite(g, y, yp, s):
    i = min(max(int(np.searchsorted(g, s)) - 1, 0), len(g) - 2)
    h = g[i + 1] - g[i]
    t = (s - g[i]) / h
    return (
        (2 * t**3 - 3 * t**2 + 1) * y[i]
        + (t**3 - 2 * t**2 + t) * h * yp[i]
        + (-2 * t**3 + 3 * t**2) * y[i + 1]
        + (t**3 - t**2) * h * yp[i + 1]
    )


def sign_change_zeros(g, y, yp, tol: float = ZERO_TOL) -> list[float]:
    """Zeros of a sampled solution: sign-change brackets refined by bisection.

    Bisection runs on the cubic Hermite interpolant built from (y, y').
    Exact zeros at nodes are reported once.
    """
    out = []
    for i in range(len(g) - 1):
        a, b = y[i], y[i + 1]
        if a == 0.0:
            if yp[i] == 0.0:
                raise ValueError("tangential zero: y = y' = 0 only for the trivial solution")
            if not out or out[-1] != g[i]:
                out.append(float(g[i]))
            continue
        if a * b >= 0.0:
            continue
        lo, hi = g[i], g[i + 1]
        flo = a
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            fm = _hermite(g, y, yp, mid)
            if (fm < 0) == (flo < 0):
                lo, flo = mid, fm
            else:
                hi = mid
        out.append(float(0.5 * (lo + hi)))
    if y[-1] == 0.0 and (not out or out[-1] != g[-1]):
        out.append(float(g[-1]))
    return out


def _step_matrices(s_grid, q_samples) -> np.ndarray:
    """RK4 one-step transfer matrices for z = (y, y'), z' = [[0, 1], [-Q, 0]] z."""
    s = np.asarray(s_grid, float)
    q = np.asarray(q_samples, float)
    h = np.diff(s)
    if np.ptp(q) == 0.0:
        qm = np.full(h.shape, q[0])
    elif len(s) >= 4:
        qm = CubicSpline(s, q)(s[:-1] + 0.5 * h)
    else:
        qm = 0.5 * (q[:-1] + q[1:])
    q0, q1 = q[:-1], q[1:]

    def A(qv):
        out = np.zeros((len(qv), 2, 2))
        out[:, 0, 1] = 1.0
        out[:, 1, 0] = -qv
        return out

    A0, Am, A1 = A(q0), A(qm), A(q1)
    eye = np.broadcast_to(np.eye(2), A0.shape)
    hh = h[:, None, None]
    K1 = A0
    K2 = Am @ (eye + 0.5 * hh * K1)
    K3 = Am @ (eye + 0.5 * hh * K2)
    K4 = A1 @ (eye + hh * K3)
    return eye + hh / 6.0 * (K1 + 2 * K2 + 2 * K3 + K4)


def solve_linear_ode(s_grid, q_samples, y0: float, yp0: float, anchor: int = 0) -> LinearOdeSolution:
    """RK4 solution of y'' + Q(s) y = 0 with (y, y') = (y0, yp0) at ``s_grid[anchor]``.

    Q between nodes comes from a cubic spline through ``q_samples``.
    Integration runs forward and backward from the anchor node.
    """
    s_grid = np.asarray(s_grid, float)
    q_samples = np.asarray(q_samples, float)
    if s_grid.ndim != 1 or s_grid.shape != q_samples.shape:
        raise GridMismatch("q_samples must be sampled on s_grid")
    if len(s_grid) < 2 or np.any(np.diff(s_grid) <= 0):
        raise GridMismatch("s_grid must be strictly increasing with >= 2 nodes")
    if not 0 <= anchor < len(s_grid):
        raise GridMismatch("anchor index out of range")
    M = _step_matrices(s_grid, q_samples)
    dets = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
    N = len(s_grid)
    z = np.empty((N, 2))
    abel = np.empty(N)
    z[anchor] = (y0, yp0)
    abel[anchor] = 1.0
    for k in range(anchor, N - 1):
        z[k + 1] = M[k] @ z[k]
        abel[k + 1] = abel[k] * dets[k]
    for k in range(anchor - 1, -1, -1):
        z[k] = np.linalg.solve(M[k], z[k + 1])
        abel[k] = abel[k + 1] / dets[k]
    return LinearOdeSolution(s_grid, z[:, 0], z[:, 1], (float(y0), float(yp0)), anchor, abel)


def wronskian(y1: LinearOdeSolution, y2: LinearOdeSolution, method: str = "abel") -> np.ndarray:
    """W(y1, y2) = y1' y2 - y1 y2' on the common grid.

    ``method="direct"`` evaluates the products pointwise, which loses all
    accuracy once |y| ~ 1e8 (cancellation of two ~|y|^2 terms).
    ``method="abel"`` evaluates W at the anchor of ``y1`` and propagates it with
    the product of the discrete transfer-matrix determinants, i.e. the
    discrete form of Abel's identity for the RK4 flow.
    """
    if y1.s_grid.shape != y2.s_grid.shape or np.any(y1.s_grid != y2.s_grid):
        raise GridMismatch("solutions live on different grids")
    direct = y1.yp_samples * y2.y_samples - y1.y_samples * y2.yp_samples
    if method == "direct":
        return direct
    if method != "abel":
        raise ValueError(f"unknown method {method!r}")
    # abel arrays on one grid agree up to a constant factor, whatever the anchor
    r = y1.anchor
    return direct[r] * y1.abel / y1.abel[r]


# -- Schwarzian ---------------------------------------------------------------


def schwarzian(p, s: float) -> float:
    """{p, s} = p'''/p' - 3/2 (p''/p')^2.

    ``p`` may be a callable (evaluated exactly with order-3 jets, so it must
    be written with :mod:`finsler_pd.jets` functions), or a tuple
    ``(s_grid, p_samples)`` on a uniform grid, differentiated with 7-point
    central stencils at the node nearest to ``s``.
    """
    if callable(p):
        (t,) = jets.seed([s], order=3)
        c = p(t).coef
        d1, d2, d3 = c[1], 2.0 * c[2], 6.0 * c[3]
    else:
        g, ps = (np.asarray(a, float) for a in p)
        i = int(np.argmin(np.abs(g - s)))
        d1, d2, d3 = stencil_derivatives(g, ps, i)
    if abs(d1) < CRITICAL_TOL:
        raise CriticalPoint(f"p'({s}) = {d1:.3g} vanishes")
    return float(d3 / d1 - 1.5 * (d2 / d1) ** 2)


def stencil_derivatives(g, ps, i: int) -> tuple[float, float, float]:
    if i < 3 or i > len(g) - 4:
        raise ValueError("stencil needs 3 nodes on each side")
    win = g[i - 3 : i + 4]
    steps = np.diff(win)
    h = steps.mean()
    if np.ptp(steps) > 1e-9 * h:
        raise ValueError("stencil window is not uniform")
    f = ps[i - 3 : i + 4]
    if not np.all(np.isfinite(f)):
        raise ValueError("stencil touches a pole marker")
    return float(_D1 @ f / h), float(_D2 @ f / h**2), float(_D3 @ f / h**3)


# -- Moebius maps ---------------------------------------------------------------


@dataclass(frozen=True)
class MobiusMap:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if self.det == 0.0:
            raise DegenerateCoefficients("Moebius map needs ad - bc != 0")

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def __call__(self, p):
        return (self.a * p + self.b) / (self.c * p + self.d)

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """self o other, i.e. the matrix product."""
        a, b, c, d = self.a, self.b, self.c, self.d
        e, f, g, h = other.a, other.b, other.c, other.d
        return MobiusMap(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)


def closed_form_parameter(target: float, coeffs=(0.0, 1.0, 1.0, 0.0)) -> Callable:
    """Analytic projective parameter with constant Schwarzian ``target``.

    The basis pair solves y'' + (target/2) y = 0, so with
    ``w = sqrt(|target|/2)``:
    ``{cos ws, sin ws}`` for target > 0, ``{e^{ws}, e^{-ws}}`` for target < 0,
    ``{1, s}`` for target = 0, combined as
    ``(al*u1 + be*u2) / (ga*u1 + de*u2)``.
    """
    al, be, ga, de = (float(c) for c in coeffs)
    if al * de - be * ga == 0.0:
        raise DegenerateCoefficients("need al*de - be*ga != 0")
    w = math.sqrt(abs(target) / 2.0)
    if target > 0:
        basis = lambda s: (jets.cos(w * s), jets.sin(w * s))  # noqa: E731
    elif target < 0:
        basis = lambda s: (jets.exp(w * s), jets.exp(-w * s))  # noqa: E731
    else:
        basis = lambda s: (1.0 + 0.0 * s, s)  # noqa: E731

    def p(s):
        u1, u2 = basis(s)
        return (al * u1 + be * u2) / (ga * u1 + de * u2)

    p.target = target
    p.frequency = w
    return p


# -- projective parameter along a geodesic ----------------------------------


@dataclass(frozen=True)
class ProjectiveParameter:
    s_grid: np.ndarray
    p_samples: np.ndarray  # NaN marks nodes adjacent to a pole
    pair: tuple[LinearOdeSolution, LinearOdeSolution]  # (numerator, denominator)
    poles: list[float] = field(default_factory=list)
    q_samples: np.ndarray | None = None

    @property
    def derivative(self) -> np.ndarray:
        """p' = W / y2^2 with W from Abel propagation."""
        y1, y2 = self.pair
        return wronskian(y1, y2) / y2.y_samples**2

    def schwarzian_samples(self, pole_clearance: float = 0.1) -> np.ndarray:
        """Numerical {p, s} at every node at least ``pole_clearance`` from a pole.

        {p, s} is unchanged by any Mobius map, so each stencil runs on the
        local ratio (y2(si) y1 - y1(si) y2)/(y2'(si) y1 - y1'(si) y2). Its
        denominator is stationary at si, which keeps the nearest pole of the
        stenciled function as far away as the pair allows.
        """
        g = self.s_grid
        out = np.full(len(g), np.nan)
        poles = np.asarray(self.poles)
        u, v = self.pair
        y1, y2, d1s, d2s = u.y_samples, v.y_samples, u.yp_samples, v.yp_samples
        for i in range(3, len(g) - 3):
            if poles.size and np.min(np.abs(poles - g[i])) < pole_clearance:
                continue
            num = y2[i] * y1 - y1[i] * y2
            den = d2s[i] * y1 - d1s[i] * y2
            f = num / np.where(den == 0, np.nan, den)
            try:
                d1, d2, d3 = stencil_derivatives(g, f, i)
            except ValueError:
                continue
            if abs(d1) >= CRITICAL_TOL:
                out[i] = d3 / d1 - 1.5 * (d2 / d1) ** 2
        return out

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "y1", "y2", "p", "pole", "Q", "schwarzian"])
        S = self.schwarzian_samples()
        y1, y2 = self.pair
        q = self.q_samples
        for k, s in enumerate(self.s_grid):
            p = self.p_samples[k]
            w.writerow(
                [
                    format(float(s), ".17g"),
                    format(float(y1.y_samples[k]), ".17g"),
                    format(float(y2.y_samples[k]), ".17g"),
                    "" if np.isnan(p) else format(float(p), ".17g"),
                    int(np.isnan(p)),
                    "" if q is None else format(float(q[k]), ".17g"),
                    "" if np.isnan(S[k]) else format(float(S[k]), ".17g"),
                ]
            )


def ratio_parameter(num: LinearOdeSolution, den: LinearOdeSolution, q_samples=None) -> ProjectiveParameter:
    """p = num/den with poles at the zeros of ``den`` (pole-adjacent nodes -> NaN)."""
    g = den.s_grid
    poles = den.zeros()
    with np.errstate(divide="ignore", invalid="ignore"):
        p = num.y_samples / den.y_samples
    for z in poles:
        i = int(np.searchsorted(g, z))
        for j in (i - 1, i):
            if 0 <= j < len(g):
                p[j] = np.nan
    return ProjectiveParameter(g, p, (num, den), poles, q_samples)


def canonical_pair(s_grid, q_samples, anchor: int = 0):
    """(y1, y2) with y1 = (0, 1), y2 = (1, 0) at the anchor node, so W = 1."""
    y1 = solve_linear_ode(s_grid, q_samples, 0.0, 1.0, anchor)
    y2 = solve_linear_ode(s_grid, q_samples, 1.0, 0.0, anchor)
    return y1, y2


def projective_parameter(path) -> ProjectiveParameter:
    """Canonical projective parameter y1/y2 along a path carrying Q samples.

    The pair is anchored at s = 0 when the grid contains it, else at the
    first node.
    """
    if path.q_samples is None:
        raise ValueError("path has no q_samples; run q_along first")
    g = path.s_grid
    zero = np.flatnonzero(np.abs(g) < 1e-12)
    anchor = int(zero[0]) if zero.size else 0
    y1, y2 = canonical_pair(g, path.q_samples, anchor)
    return ratio_parameter(y1, y2, path.q_samples)


def linear_combination(a: float, u: LinearOdeSolution, b: float, v: LinearOdeSolution) -> LinearOdeSolution:
    init = (a * u.init[0] + b * v.init[0], a * u.init[1] + b * v.init[1]) if u.anchor == v.anchor else (
        float("nan"),
        float("nan"),
    )
    return LinearOdeSolution(
        u.s_grid,
        a * u.y_samples + b * v.y_samples,
        a * u.yp_samples + b * v.yp_samples,
        init,
        u.anchor,
        u.abel,
    )


def mobius_apply(mu: MobiusMap, pp: ProjectiveParameter) -> ProjectiveParameter:
    """(a p + b)/(c p + d), realised on the underlying pair so poles stay exact."""
    y1, y2 = pp.pair
    num = linear_combination(mu.a, y1, mu.b, y2)
    den = linear_combination(mu.c, y1, mu.d, y2)
    return ratio_parameter(num, den, pp.q_samples)
