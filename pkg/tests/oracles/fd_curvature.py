"""Brute-force finite-difference curvature oracle (independent of the jet engine).

F is re-implemented in closed form on mpmath numbers and every derivative is
a nested central difference at 80 digits:

    level 1  F^2 -> g, G        step 1e-20
    level 2  G   -> N, R, Ric    step 1e-10
    level 3  Ric -> Ric_ik       step 1e-5

Rounding at one level divided by the squared step of the next stays below
1e-10 relative, far inside the 1e-4 acceptance budget.

Run ``python3 tests/oracles/fd_curvature.py`` to regenerate
``curvature_fd.json``; the tests only read the archive.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import mpmath as mp
import numpy as np

mp.mp.dps = 80
H1, H2, H3 = mp.mpf("1e-20"), mp.mpf("1e-10"), mp.mpf("1e-5")
ARCHIVE = Path(__file__).with_name("curvature_fd.json")

# (metric, dim, sample count, seed)
PLAN = [
    ("euclidean", 2, 10, 101),
    ("sphere", 2, 20, 102),
    ("klein", 2, 20, 103),
    ("funk", 2, 20, 104),
    ("randers", 2, 10, 105),
    ("klein", 3, 5, 106),
]


def _dot(a, b):
    return mp.fsum(u * v for u, v in zip(a, b))


def closed_form(name: str, n: int):
    if name == "euclidean":
        return lambda x, y: mp.sqrt(_dot(y, y))
    if name == "sphere":
        return lambda x, y: 2 * mp.sqrt(_dot(y, y)) / (1 + _dot(x, x))
    if name == "klein":

        def F(x, y):
            w = 1 - _dot(x, x)
            return mp.sqrt(_dot(y, y) * w + _dot(x, y) ** 2) / w

        return F
    if name == "funk":

        def F(x, y):
            w = 1 - _dot(x, x)
            return (mp.sqrt(_dot(y, y) * w + _dot(x, y) ** 2) + _dot(x, y)) / w

        return F
    if name == "randers":
        eps = mp.mpf("0.2")
        return lambda x, y: mp.sqrt(_dot(y, y)) + eps * mp.fsum(mp.sin(x[(i + 1) % n]) * y[i] for i in range(n))
    raise KeyError(name)


def _shift(z, i, d):
    z = list(z)
    z[i] += d
    return z


def _d1(f, z, i, h):
    return (f(_shift(z, i, h)) - f(_shift(z, i, -h))) / (2 * h)


def _d2(f, z, i, j, h, f0=None):
    if i == j:
        f0 = f(z) if f0 is None else f0
        return (f(_shift(z, i, h)) - 2 * f0 + f(_shift(z, i, -h))) / h**2
    pp = f(_shift(_shift(z, i, h), j, h))
    pm = f(_shift(_shift(z, i, h), j, -h))
    mp_ = f(_shift(_shift(z, i, -h), j, h))
    mm = f(_shift(_shift(z, i, -h), j, -h))
    return (pp - pm - mp_ + mm) / (4 * h**2)


def _vec_d1(f, z, i, h):
    a, b = f(_shift(z, i, h)), f(_shift(z, i, -h))
    return [(u - v) / (2 * h) for u, v in zip(a, b)]


def _vec_d2(f, z, i, j, h, f0):
    if i == j:
        a, b = f(_shift(z, i, h)), f(_shift(z, i, -h))
        return [(u - 2 * c + v) / h**2 for u, c, v in zip(a, f0, b)]
    pp = f(_shift(_shift(z, i, h), j, h))
    pm = f(_shift(_shift(z, i, h), j, -h))
    mp_ = f(_shift(_shift(z, i, -h), j, h))
    mm = f(_shift(_shift(z, i, -h), j, -h))
    return [(a - b - c + d) / (4 * h**2) for a, b, c, d in zip(pp, pm, mp_, mm)]


class Oracle:
    def __init__(self, name: str, n: int):
        self.n = n
        F = closed_form(name, n)
        self.E = lambda z: F(z[:n], z[n:]) ** 2
        self.F = F

    def g_and_G(self, z):
        n, E = self.n, self.E
        E0 = E(z)
        Eyy = mp.matrix(n, n)
        for i in range(n):
            for j in range(i, n):
                Eyy[i, j] = Eyy[j, i] = _d2(E, z, n + i, n + j, H1, E0)
        Exy = [[_d2(E, z, k, n + l, H1) for l in range(n)] for k in range(n)]
        Ex = [_d1(E, z, k, H1) for k in range(n)]
        g = Eyy / 2
        rhs = mp.matrix([(mp.fsum(Exy[k][l] * z[n + k] for k in range(n)) - Ex[l]) / 2 for l in range(n)])
        G = mp.lu_solve(g, rhs)
        return g, [G[i] for i in range(n)]

    def G(self, z):
        return self.g_and_G(z)[1]

    def curvature(self, z):
        """(g, G, N, R, Ric) with the R^i_k formula of the x'' + G = 0 convention."""
        n = self.n
        g, G0 = self.g_and_G(z)
        Gx = [_vec_d1(self.G, z, k, H2) for k in range(n)]  # Gx[k][i] = dG^i/dx^k
        Gy = [_vec_d1(self.G, z, n + k, H2) for k in range(n)]
        Gyy = {}
        Gxy = {}
        for j in range(n):
            for k in range(n):
                if k >= j:
                    Gyy[j, k] = Gyy[k, j] = _vec_d2(self.G, z, n + j, n + k, H2, G0)
                Gxy[j, k] = _vec_d2(self.G, z, j, n + k, H2, G0)
        y = z[n:]
        R = [[mp.mpf(0)] * n for _ in range(n)]
        for i in range(n):
            for k in range(n):
                acc = Gx[k][i]
                for j in range(n):
                    acc -= y[j] * Gxy[j, k][i] / 2
                    acc += G0[j] * Gyy[j, k][i] / 2
                    acc -= Gy[j][i] * Gy[k][j] / 4
                R[i][k] = acc
        N = [[Gy[j][i] / 2 for j in range(n)] for i in range(n)]
        ric = mp.fsum(R[i][i] for i in range(n))
        return g, G0, N, R, ric

    def ric(self, z):
        return self.curvature(z)[4]

    def ric_tensor(self, z, ric0):
        n = self.n
        out = [[None] * n for _ in range(n)]
        for i in range(n):
            for k in range(i, n):
                out[i][k] = out[k][i] = _d2(self.ric, z, n + i, n + k, H3, ric0) / 2
        return out


def _f(v):
    if isinstance(v, list):
        return [_f(u) for u in v]
    if isinstance(v, mp.matrix):
        return [[float(v[i, j]) for j in range(v.cols)] for i in range(v.rows)]
    return float(v)


def generate(plan=PLAN) -> dict:
    sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "src"))
    from finsler_pd import metrics as M

    out = {"steps": [str(H1), str(H2), str(H3)], "dps": mp.mp.dps, "records": []}
    for name, n, count, seed in plan:
        m = M.ZOO[name](n)
        orc = Oracle(name, n)
        for s in M.random_samples(m, count, np.random.default_rng(seed)):
            z = [mp.mpf(v) for v in (*s.x, *s.y)]
            g, G, N, R, ric = orc.curvature(z)
            out["records"].append(
                {
                    "metric": name,
                    "dim": n,
                    "x": list(s.x),
                    "y": list(s.y),
                    "F": _f(orc.F(z[:n], z[n:])),
                    "g": _f(g),
                    "G": _f(G),
                    "N": _f(N),
                    "R": _f(R),
                    "Ric": _f(ric),
                    "Ric_ik": _f(orc.ric_tensor(z, ric)),
                }
            )
            print(name, n, len(out["records"]), flush=True)
    return out


def load() -> dict:
    return json.loads(ARCHIVE.read_text())


if __name__ == "__main__":
    ARCHIVE.write_text(json.dumps(generate(), indent=1) + "\n")
