"""Spray, nonlinear connection, Riemann/Ricci curvature and Berwald checks.

Conventions
-----------
``G^i`` follows the convention in which geodesics satisfy ``x'' + G^i = 0``,
i.e. ``G^i = gamma^i_jk y^j y^k`` for a Riemannian metric.  References that
write ``x'' + 2 G^i = 0`` use exactly half of this quantity.  With this
convention ``N^i_j = (1/2) dG^i/dy^j`` is the usual nonlinear connection,
``G^r_lj = (1/2) d^2 G^r / dy^l dy^j`` the Berwald coefficients, and the
Riemann curvature reads::

    R^i_k = dG^i/dx^k - 1/2 y^j d2G^i/dx^j dy^k
            + 1/2 G^j d2G^i/dy^j dy^k - 1/4 dG^i/dy^j dG^j/dy^k

All derivatives come from one Taylor jet of F^2 in the 2n variables
``(x, y)``; the jet order fixes how many derivatives survive
(spray: 2, Riemann: 4, Akbar-Zadeh Ricci tensor: 6, its covariant derivative: 7).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import NotNegativeDefinite, SingularMetric
from .metrics import FinslerMetric, TangentSample, check_convex, validate

SINGULAR_TOL = 1e-12


def lu_solve(A, b):
    """Solve ``A x = b`` by Gaussian elimination with partial pivoting.

    Works on floats and on jets alike; pivots are chosen on the value part.
    Raises :class:`SingularMetric` when a pivot falls below
    ``SINGULAR_TOL * max |A_ij|``.
    """
    n = len(b)
    A = [list(row) for row in A]
    b = list(b)
    scale = max(abs(jets.value_of(v)) for row in A for v in row)
    if scale == 0.0:
        raise SingularMetric("zero matrix")
    for col in range(n):
        p = max(range(col, n), key=lambda r: abs(jets.value_of(A[r][col])))
        if abs(jets.value_of(A[p][col])) <= SINGULAR_TOL * scale:
            raise SingularMetric("matrix is numerically singular")
        if p != col:
            A[col], A[p] = A[p], A[col]
            b[col], b[p] = b[p], b[col]
        inv = 1.0 / A[col][col]
        for r in range(col + 1, n):
            f = A[r][col] * inv
            for c in range(col + 1, n):
                A[r][c] = A[r][c] - f * A[col][c]
            b[r] = b[r] - f * b[col]
    x = [None] * n
    for r in range(n - 1, -1, -1):
        acc = b[r]
        for c in range(r + 1, n):
            acc = acc - A[r][c] * x[c]
        x[r] = acc / A[r][r]
    return x


def energy_jet(m: FinslerMetric, x, y, order: int):
    """Jet of F^2 in the variables (x^1..x^n, y^1..y^n) at (x, y)."""
    z = jets.seed(np.concatenate([np.asarray(x, float), np.asarray(y, float)]), order=order)
    n = m.dim
    F = m.func(z[:n], z[n:])
    return F * F, z[n:]


def spray_from_energy(E, Y, n: int):
    """Spray coefficients of the metric whose squared norm has jet ``E``.

    ``G^i = 1/2 g^{il} ([E]_{x^k y^l} y^k - [E]_{x^l})`` with
    ``g_ij = 1/2 [E]_{y^i y^j}``.  Returns (G jets, g jets).
    """
    Ex = [E.diff(k) for k in range(n)]
    Ey = [E.diff(n + l) for l in range(n)]
    g = [[0.5 * Ey[i].diff(n + j) for j in range(n)] for i in range(n)]
    rhs = []
    for l in range(n):
        acc = -Ex[l]
        for k in range(n):
            acc = acc + Ex[k].diff(n + l) * Y[k]
        rhs.append(0.5 * acc)
    return lu_solve(g, rhs), g


def _spray_values(m: FinslerMetric, x, y) -> np.ndarray:
    """Fast path for the geodesic right-hand side (floats only, no validation)."""
    n = m.dim
    E, _ = energy_jet(m, x, y, 2)
    H = E.hess
    grad = E.grad
    g = 0.5 * H[n:, n:]
    rhs = 0.5 * (H[:n, n:].T @ np.asarray(y, float) - grad[:n])
    return np.array(lu_solve(g.tolist(), rhs.tolist()))


def _riemann_from_spray(G, Y, n: int):
    dGy = [[G[i].diff(n + j) for j in range(n)] for i in range(n)]
    R = []
    for i in range(n):
        row = []
        for k in range(n):
            acc = G[i].diff(k)
            for j in range(n):
                acc = acc - 0.5 * Y[j] * dGy[i][k].diff(j)
                acc = acc + 0.5 * G[j] * dGy[i][k].diff(n + j)
                acc = acc - 0.25 * dGy[i][j] * dGy[j][k]
            row.append(acc)
        R.append(row)
    return R


def _ricci_jets(m: FinslerMetric, x, y, order: int):
    n = m.dim
    E, Y = energy_jet(m, x, y, order)
    G, g = spray_from_energy(E, Y, n)
    R = _riemann_from_spray(G, Y, n)
    ric = R[0][0]
    for i in range(1, n):
        ric = ric + R[i][i]
    return E, Y, G, g, R, ric


def _values(mat) -> np.ndarray:
    return np.array([[jets.value_of(v) for v in row] for row in mat])


@dataclass(frozen=True)
class CurvaturePack:
    G: np.ndarray
    N: np.ndarray
    R: np.ndarray
    ric_scalar: float
    ric_tensor: np.ndarray


def curvature_pack(m: FinslerMetric, s: TangentSample) -> CurvaturePack:
    validate(m, s)
    n = m.dim
    E, Y, G, g, R, ric = _ricci_jets(m, s.x, s.y, 6)
    check_convex(_values(g))
    h = ric
    ric_ik = np.array([[0.5 * h.diff(n + i).diff(n + k).value for k in range(n)] for i in range(n)])
    N = np.array([[0.5 * G[i].diff(n + j).value for j in range(n)] for i in range(n)])
    return CurvaturePack(
        G=np.array([v.value for v in G]),
        N=N,
        R=_values(R),
        ric_scalar=ric.value,
        ric_tensor=ric_ik,
    )


def spray_coefficients(m: FinslerMetric, s: TangentSample) -> np.ndarray:
    validate(m, s)
    return _spray_values(m, s.x, s.y)


def nonlinear_connection(m: FinslerMetric, s: TangentSample) -> np.ndarray:
    validate(m, s)
    n = m.dim
    E, Y = energy_jet(m, s.x, s.y, 3)
    G, _ = spray_from_energy(E, Y, n)
    return np.array([[0.5 * G[i].diff(n + j).value for j in range(n)] for i in range(n)])


def riemann_curvature(m: FinslerMetric, s: TangentSample) -> np.ndarray:
    validate(m, s)
    return _values(_ricci_jets(m, s.x, s.y, 4)[4])


def ricci_scalar(m: FinslerMetric, s: TangentSample) -> float:
    validate(m, s)
    return _ricci_jets(m, s.x, s.y, 4)[5].value


def ricci_scalar_fast(m: FinslerMetric, x, y) -> float:
    """Ricci scalar without sample validation (used along geodesics)."""
    return _ricci_jets(m, x, y, 4)[5].value


def ricci_tensor(m: FinslerMetric, s: TangentSample) -> np.ndarray:
    """Akbar-Zadeh Ricci tensor.

    ``Ric_ik = 1/2 (F^2 Ric(x, l))_{y^i y^k}`` where ``Ric(x, l)`` is the Ricci
    scalar at the unit vector; since ``F^2 Ric(x, l) = Ric(x, y)`` this is half
    the y-Hessian of the 2-homogeneous trace ``R^i_i``.  The result is
    0-homogeneous and ``Ric_ik y^i y^k = Ric(x, y)``.
    """
    validate(m, s)
    n = m.dim
    ric = _ricci_jets(m, s.x, s.y, 6)[5]
    h = ric
    return np.array([[0.5 * h.diff(n + i).diff(n + k).value for k in range(n)] for i in range(n)])


def berwald_parallel_defect(m: FinslerMetric, s: TangentSample) -> tuple[float, float]:
    """Horizontal and vertical Berwald covariant derivatives of Ric_ij.

    Returns ``(h_defect, v_defect)`` where ``h_defect`` is the max over
    (h, l, j) of ``|dRic_hl/dx^j - N^m_j dRic_hl/dy^m - Ric_hr G^r_lj - Ric_lr G^r_hj|``
    and ``v_defect`` the max of ``|dRic_ij/dy^k|``.
    """
    validate(m, s)
    n = m.dim
    _, _, G, _, _, ric = _ricci_jets(m, s.x, s.y, 7)
    h = ric
    Ric = [[0.5 * h.diff(n + i).diff(n + k) for k in range(n)] for i in range(n)]
    ric_v = _values(Ric)
    dx = np.array([[[Ric[i][j].diff(k).value for k in range(n)] for j in range(n)] for i in range(n)])
    dy = np.array([[[Ric[i][j].diff(n + k).value for k in range(n)] for j in range(n)] for i in range(n)])
    Gy = [[G[r].diff(n + l) for l in range(n)] for r in range(n)]
    N = np.array([[0.5 * Gy[r][l].value for l in range(n)] for r in range(n)])
    B = np.array(
        [[[0.5 * Gy[r][l].diff(n + j).value for j in range(n)] for l in range(n)] for r in range(n)]
    )
    # delta/delta x^j Ric_hl
    delta = dx - np.einsum("mj,hlm->hlj", N, dy)
    cov = delta - np.einsum("hr,rlj->hlj", ric_v, B) - np.einsum("lr,rhj->hlj", ric_v, B)
    return float(np.max(np.abs(cov))), float(np.max(np.abs(dy)))


@dataclass(frozen=True)
class SprayComparison:
    defect: float
    G: np.ndarray
    G_hat: np.ndarray
    F: float
    F_hat: float


def theorem3_spray_comparison(m: FinslerMetric, s: TangentSample) -> SprayComparison:
    """Compare the spray of F with that of F^ = sqrt(-Ric_ij y^i y^j)."""
    validate(m, s)
    n = m.dim
    E, _, G, _, _, ric = _ricci_jets(m, s.x, s.y, 6)
    E_hat = -ric  # Ric_ij y^i y^j = Ric(x, y) by homogeneity
    neg_ric = np.array(
        [[0.5 * E_hat.diff(n + i).diff(n + k).value for k in range(n)] for i in range(n)]
    )
    eig = np.linalg.eigvalsh(0.5 * (neg_ric + neg_ric.T))
    if eig[0] <= 1e-10 * max(abs(eig[-1]), 1e-300):
        raise NotNegativeDefinite(f"Ricci tensor is not negative-definite (eig(-Ric) = {eig})")
    Yh = jets.seed(np.concatenate([s.x, s.y]), order=E_hat.order)[n:]
    G_hat, _ = spray_from_energy(E_hat, Yh, n)
    Gv = np.array([v.value for v in G])
    Ghv = np.array([v.value for v in G_hat])
    defect = float(np.max(np.abs(Ghv - Gv) / (1.0 + np.abs(Gv))))
    return SprayComparison(defect, Gv, Ghv, float(np.sqrt(E.value)), float(np.sqrt(E_hat.value)))


def theorem3_spray_defect(m: FinslerMetric, s: TangentSample) -> float:
    return theorem3_spray_comparison(m, s).defect
