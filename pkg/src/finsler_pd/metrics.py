"""Finsler metrics, the fundamental tensor and the built-in metric zoo.

Metric functions are written against plain arithmetic plus the functions in
:mod:`finsler_pd.jets`, so the same code evaluates on floats and on jets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import jets
from .errors import ConfigError, DomainError, NotConvex, ZeroVector

BALL_MARGIN = 1e-6
CONVEXITY_TOL = 1e-10


@dataclass(frozen=True)
class FinslerMetric:
    """A Finsler structure on a single chart.

    ``func(x, y)`` receives sequences of floats or :class:`~finsler_pd.jets.Jet`
    and must be positively 1-homogeneous in ``y``.  ``chart`` is either
    ``"ball"`` (open unit ball, with boundary margin) or ``"all"``.
    """

    name: str
    dim: int
    func: Callable
    chart: str = "all"
    reversible: bool = True
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 2:
            raise ConfigError("metric dimension must be >= 2")
        if self.chart not in ("ball", "all"):
            raise ConfigError(f"unknown chart {self.chart!r}")

    def in_chart(self, x, margin: float = BALL_MARGIN) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,) or not np.all(np.isfinite(x)):
            return False
        if self.chart == "ball":
            return float(np.linalg.norm(x)) <= 1.0 - margin
        return True

    def __call__(self, x, y):
        return self.func(x, y)


@dataclass(frozen=True)
class TangentSample:
    x: tuple
    y: tuple

    def __init__(self, x, y):
        object.__setattr__(self, "x", tuple(float(v) for v in x))
        object.__setattr__(self, "y", tuple(float(v) for v in y))

    def direction(self, m: FinslerMetric) -> np.ndarray:
        """Unit vector l^i = y^i / F(x, y)."""
        return np.asarray(self.y) / eval_metric(m, self)


def _dot(a, b):
    out = a[0] * b[0]
    for u, v in zip(a[1:], b[1:]):
        out = out + u * v
    return out


def validate(m: FinslerMetric, s: TangentSample) -> None:
    if len(s.x) != m.dim or len(s.y) != m.dim:
        raise DomainError(f"sample dimension does not match metric dim {m.dim}")
    if not m.in_chart(s.x):
        raise DomainError(f"x={s.x} outside the {m.chart} chart of {m.name}")
    if not any(s.y):
        raise ZeroVector("tangent vector y must be non-zero")


def eval_metric(m: FinslerMetric, s: TangentSample) -> float:
    validate(m, s)
    return float(m.func(s.x, s.y))


def fundamental_tensor(m: FinslerMetric, s: TangentSample) -> np.ndarray:
    """g_ij = Hessian in y of F^2/2, checked for strong convexity."""
    validate(m, s)
    ys = jets.seed(s.y, order=2)
    F = m.func(s.x, ys)
    g = (0.5 * F * F).hess
    check_convex(g)
    return g


def check_convex(g: np.ndarray, tol: float = CONVEXITY_TOL) -> None:
    eig = np.linalg.eigvalsh(0.5 * (g + g.T))
    if eig[0] <= tol * abs(eig[-1]):
        raise NotConvex(f"fundamental tensor not positive-definite (eigenvalues {eig})")


@dataclass
class HomogeneityReport:
    defect: float
    by_lambda: dict
    asymmetry: float | None = None


def check_homogeneity(
    m: FinslerMetric,
    samples: Sequence[TangentSample],
    lambdas: Sequence[float] = (0.5, 2.0, 7.0),
) -> HomogeneityReport:
    """Max relative defect |F(x, ly) - lF(x, y)| / (lF(x, y)).

    A negative ``lambda`` compares against ``|lambda| F(x, y)``, i.e. it
    measures the failure of reversibility rather than positive homogeneity;
    those defects go to ``asymmetry`` and are excluded from ``defect``.
    """
    if not samples:
        raise ValueError("need at least one sample")
    by_lambda = {}
    for lam in lambdas:
        worst = 0.0
        for s in samples:
            f = eval_metric(m, s)
            fl = float(m.func(s.x, [lam * v for v in s.y]))
            worst = max(worst, abs(fl - abs(lam) * f) / (abs(lam) * f))
        by_lambda[lam] = worst
    pos = [v for k, v in by_lambda.items() if k > 0]
    neg = [v for k, v in by_lambda.items() if k < 0]
    return HomogeneityReport(
        defect=max(pos, default=0.0), by_lambda=by_lambda, asymmetry=max(neg) if neg else None
    )


def random_samples(m: FinslerMetric, count: int, rng: np.random.Generator, radius: float = 0.8):
    """Random tangent samples: points well inside the chart, Gaussian directions."""
    out = []
    while len(out) < count:
        if m.chart == "ball":
            x = rng.normal(size=m.dim)
            x *= radius * rng.uniform() ** (1.0 / m.dim) / np.linalg.norm(x)
        else:
            x = rng.uniform(-2.0, 2.0, size=m.dim)
        y = rng.normal(size=m.dim)
        out.append(TangentSample(x, y))
    return out


# -- zoo ------------------------------------------------------------------


def euclidean(dim: int = 2, chart: str = "all") -> FinslerMetric:
    def F(x, y):
        return jets.sqrt(_dot(y, y))

    return FinslerMetric("euclidean", dim, F, chart=chart, params={"chart": chart})


def sphere(dim: int = 2) -> FinslerMetric:
    """Unit round sphere in the stereographic chart (K = +1)."""

    def F(x, y):
        return 2.0 * jets.sqrt(_dot(y, y)) / (1.0 + _dot(x, x))

    return FinslerMetric("sphere", dim, F)


def klein(dim: int = 2) -> FinslerMetric:
    """Klein model of hyperbolic space (K = -1) on the unit ball."""

    def F(x, y):
        w = 1.0 - _dot(x, x)
        xy = _dot(x, y)
        return jets.sqrt(_dot(y, y) * w + xy * xy) / w

    return FinslerMetric("klein", dim, F, chart="ball")


def funk(dim: int = 2) -> FinslerMetric:
    """Funk metric on the unit ball: non-reversible, flag curvature -1/4."""

    def F(x, y):
        w = 1.0 - _dot(x, x)
        xy = _dot(x, y)
        return (jets.sqrt(_dot(y, y) * w + xy * xy) + xy) / w

    return FinslerMetric("funk", dim, F, chart="ball", reversible=False)


def randers(dim: int = 2, eps: float = 0.2) -> FinslerMetric:
    """Euclidean norm plus the non-closed 1-form eps * sum_i sin(x_{i+1}) dx^i."""
    if not 0.0 <= eps * np.sqrt(dim) < 1.0:
        raise ConfigError("randers eps too large: need eps*sqrt(dim) < 1")

    def F(x, y):
        beta = jets.sin(x[1 % dim]) * y[0]
        for i in range(1, dim):
            beta = beta + jets.sin(x[(i + 1) % dim]) * y[i]
        return jets.sqrt(_dot(y, y)) + eps * beta

    return FinslerMetric("randers", dim, F, reversible=eps == 0.0, params={"eps": eps})


def quartic(dim: int = 2, a: float = 1.0) -> FinslerMetric:
    """Minkowski norm F^4 = sum y_i^4 + a |y|^4.

    Strongly convex for a >= 0.  Around a = -0.45 (n = 2) F stays positive
    but the unit ball is dented around the coordinate axes, so g_ij is
    indefinite there: a deliberately broken test metric.
    """
    if not 1.0 + a * dim > 0.0 or not 1.0 + a > 0.0:
        raise ConfigError("quartic a too negative: F vanishes on some direction")

    def F(x, y):
        s4 = y[0] ** 4
        for v in y[1:]:
            s4 = s4 + v**4
        r2 = _dot(y, y)
        return jets.sqrt(jets.sqrt(s4 + a * r2 * r2))

    return FinslerMetric("quartic", dim, F, params={"a": a})


def riemannian(dim: int, a: Callable, name: str = "riemannian", chart: str = "all") -> FinslerMetric:
    """F = sqrt(a_ij(x) y^i y^j) for a callable ``a(x)`` returning nested rows."""

    def F(x, y):
        A = a(x)
        q = None
        for i in range(dim):
            for j in range(dim):
                t = A[i][j] * y[i] * y[j]
                q = t if q is None else q + t
        return jets.sqrt(q)

    return FinslerMetric(name, dim, F, chart=chart)


def reversed_metric(m: FinslerMetric) -> FinslerMetric:
    """F~(x, y) = F(x, -y); used for backward integration."""
    if m.reversible:
        return m

    def F(x, y):
        return m.func(x, [-v for v in y])

    return FinslerMetric(m.name + "~", m.dim, F, chart=m.chart, reversible=False, params=m.params)


ZOO = {
    "euclidean": euclidean,
    "sphere": sphere,
    "klein": klein,
    "funk": funk,
    "randers": randers,
}

# test metrics reachable by descriptor but kept out of the zoo sweeps
EXTRA = {"quartic": quartic}

_PARAM_KEYS = {
    "quartic": {"a"},
    "euclidean": {"chart"},
    "sphere": set(),
    "klein": set(),
    "funk": set(),
    "randers": {"eps"},
}


def from_descriptor(desc: dict) -> FinslerMetric:
    """Build a zoo metric from ``{"name": ..., "dim": n, "params": {...}}``."""
    if not isinstance(desc, dict):
        raise ConfigError("metric descriptor must be a JSON object")
    unknown = set(desc) - {"name", "dim", "params"}
    if unknown:
        raise ConfigError(f"unknown metric descriptor keys: {sorted(unknown)}")
    name = desc.get("name")
    ctor = ZOO.get(name) or EXTRA.get(name)
    if ctor is None:
        raise ConfigError(f"unknown metric {name!r}; choose from {sorted(ZOO) + sorted(EXTRA)}")
    dim = desc.get("dim", 2)
    if not isinstance(dim, int) or not 2 <= dim <= 4:
        raise ConfigError("dim must be an integer in [2, 4]")
    params = desc.get("params", {}) or {}
    bad = set(params) - _PARAM_KEYS[name]
    if bad:
        raise ConfigError(f"unknown params for {name}: {sorted(bad)}")
    return ctor(dim, **params)
