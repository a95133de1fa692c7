"""Funk ruler on (-1, 1), chains of projective segments and d_M upper bounds.

Every chain segment is a geodesic arc reparametrised by a projective map
``f: (-1, 1) -> M``; its cost is the Funk distance between the two interval
points that ``f`` sends to the segment ends.  The estimator searches a finite,
budget-controlled family of such chains and returns the cheapest one, which
is an upper bound for d_M.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from itertools import permutations
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    BrokenChain,
    CoverageGap,
    DomainError,
    NoGeodesicFound,
    NotNonoscillatory,
    ParameterNotGlobal,
)
from .geodesics import GeodesicPath, integrate_geodesic, integrate_geodesic_line, q_along
from .metrics import FinslerMetric
from .projective import (
    LinearOdeSolution,
    ProjectiveParameter,
    linear_combination,
    projective_parameter,
    wronskian,
)
from .sturm import interval_decomposition, sweep_pair

MATCH_TOL = 1e-6
SHOOT_TOL = 1e-8
MIN_SWEEP_WINDOW = 20.0


# -- the model interval ----------------------------------------------------------


def _check_unit(*vals) -> None:
    for v in vals:
        if not (isinstance(v, (int, float)) and -1.0 < v < 1.0):
            raise DomainError(f"point {v!r} is not inside (-1, 1)")


def _check_k(k) -> None:
    if not k > 0:
        raise DomainError(f"k must be positive, got {k}")


def funk_metric_1d(u: float, y: float, k: float = 1.0) -> float:
    """(|y| + u y) / (k (1 - u^2))."""
    u, y = float(u), float(y)
    _check_unit(u)
    _check_k(k)
    return (abs(y) + u * y) / (k * (1.0 - u * u))


def funk_distance(a: float, b: float, k: float = 1.0) -> float:
    """Funk distance from a to b on (-1, 1).

    The closed form collapses to ``ln((1 - a)/(1 - b))`` for ``a <= b`` and
    ``ln((1 + a)/(1 + b))`` otherwise; both are evaluated through ``log1p``
    so points crowding an end of the interval keep their precision.
    """
    a, b = float(a), float(b)
    _check_unit(a, b)
    _check_k(k)
    if a <= b:
        return math.log1p((b - a) / (1.0 - b)) / k
    return math.log1p((a - b) / (1.0 + b)) / k


@dataclass(frozen=True)
class FunkInterval:
    k: float = 1.0

    def __post_init__(self):
        _check_k(self.k)

    def metric(self, u: float, y: float) -> float:
        return funk_metric_1d(u, y, self.k)

    def distance(self, a: float, b: float) -> float:
        return funk_distance(a, b, self.k)


# -- chains ---------------------------------------------------------------------------


@dataclass
class ChainSegment:
    a: float
    b: float
    start: np.ndarray  # f(a)
    end: np.ndarray  # f(b)
    spec: dict = field(default_factory=dict)
    f: Callable | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {"a_i": self.a, "b_i": self.b, "segment_spec": self.spec}


@dataclass
class Chain:
    segments: list[ChainSegment] = field(default_factory=list)

    @property
    def points(self) -> list[np.ndarray]:
        if not self.segments:
            return []
        return [self.segments[0].start] + [seg.end for seg in self.segments]

    def to_list(self) -> list[dict]:
        return [seg.to_dict() for seg in self.segments]


def chain_length(c: Chain, k: float = 1.0) -> float:
    for i, seg in enumerate(c.segments):
        _check_unit(seg.a, seg.b)
        if i:
            gap = float(np.max(np.abs(np.asarray(c.segments[i - 1].end) - np.asarray(seg.start))))
            if gap > MATCH_TOL:
                raise BrokenChain(f"segments {i - 1} and {i} miss by {gap:.3g}")
    return float(sum(funk_distance(seg.a, seg.b, k) for seg in c.segments))


# -- branches of a projective parameter ----------------------------------------------


@dataclass(frozen=True)
class _Branch:
    """An inter-zero interval (a, b) of one ratio, oriented so u increases.

    ``lo_inf``/``hi_inf`` say that u runs off to -inf/+inf at that end: a
    pole of the ratio, or a window edge certified nonoscillatory.
    """

    label: str
    num: LinearOdeSolution
    den: LinearOdeSolution
    sign: float
    a: float
    b: float
    lo_inf: bool
    hi_inf: bool
    a_pole: bool
    b_pole: bool

    def u(self, s: float) -> float:
        return self.sign * self.num.at(s) / self.den.at(s)

    @property
    def full_sweep(self) -> bool:
        return self.lo_inf and self.hi_inf

    def u_range(self) -> tuple[float, float]:
        lo = -math.inf if self.lo_inf else self.u(self.a)
        hi = math.inf if self.hi_inf else self.u(self.b)
        return lo, hi

    def contains(self, s: float) -> bool:
        return self.a < s < self.b

    def s_of(self, u: float) -> float:
        """Inverse of u on the sampled part of the branch."""
        g = self.den.s_grid
        lo = self.a + (1e-9 if self.a_pole else 0.0)
        hi = self.b - (1e-9 if self.b_pole else 0.0)
        lo, hi = max(lo, g[0]), min(hi, g[-1])
        ulo, uhi = self.u(lo), self.u(hi)
        if not ulo <= u <= uhi:
            raise DomainError(f"u={u} outside the sampled range [{ulo}, {uhi}] of this branch")
        if u == ulo:
            return lo
        if u == uhi:
            return hi
        return brentq(lambda s: self.u(s) - u, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def _branches(num, den, label: str, sign: float, unbounded=(False, False)) -> list[_Branch]:
    g = den.s_grid
    zs = den.zeros()
    ends = [(float(g[0]), False)] + [(z, True) for z in zs] + [(float(g[-1]), False)]
    out = []
    for (a, a_pole), (b, b_pole) in zip(ends[:-1], ends[1:]):
        lo_inf = a_pole or unbounded[0]
        hi_inf = b_pole or unbounded[1]
        out.append(_Branch(label, num, den, sign, a, b, lo_inf, hi_inf, a_pole, b_pole))
    return out


def _canonical_branches(pp: ProjectiveParameter, unbounded=(False, False)) -> list[_Branch]:
    """Branches of y1/y2, y2/y1 and of the pair rotated by 45 degrees.

    The rotated ratios have their poles between those of y1/y2 and y2/y1, so
    a point sitting on a pole of one family lies inside a branch of another.
    """
    y1, y2 = pp.pair
    W = float(np.sign(wronskian(y1, y2)[y1.anchor]))
    r = math.sqrt(0.5)
    u, v = linear_combination(r, y1, r, y2), linear_combination(-r, y1, r, y2)  # unit determinant keeps W
    out = _branches(y1, y2, "y1/y2", W, unbounded) + _branches(y2, y1, "y2/y1", -W, unbounded)
    out += _branches(u, v, "(y1+y2)/(y2-y1)", W, unbounded) + _branches(v, u, "(y2-y1)/(y1+y2)", -W, unbounded)
    return out


def _sweep_branches(path: GeodesicPath, h: float) -> list[_Branch]:
    """Full-sweep branches certified by the oscillation analysis of Q on the path."""
    g = path.s_grid
    window = (float(g[0]), float(g[-1]))
    try:
        pp, reps = sweep_pair((g, path.q_samples), window, h)
        cover = interval_decomposition(pp, reps, strict=False)
    except (NotNonoscillatory, CoverageGap, ValueError):
        return []
    y1, y2 = pp.pair
    out = []
    for (a, b), choice, (ua, ub) in zip(cover.intervals, cover.param_choice, cover.unbounded):
        sign = -1.0 if choice.startswith("-") else 1.0
        num, den = (y1, y2) if choice.endswith("y1/y2") else (y2, y1)
        br = _Branch("sweep:" + choice, num, den, sign, a, b, True, True, not ua, not ub)
        out.append(br)
    return out


# -- budget --------------------------------------------------------------------------


@dataclass(frozen=True)
class Budget:
    n_max: int = 10_000  # largest scaling-chain n
    tau_max: float = 2.0  # largest hyperbolic translation of the model interval
    n_tau: int = 8  # translation grid: tau_max * j / n_tau
    r_exp: int = 10  # window enlargements 2^0 .. 2^r_exp on unbounded ends
    grid: int = 8  # midpoint grid intervals between the two points
    window: float = 20.0  # geodesic extension beyond each point
    h: float = 0.02
    q_stride: int = 5
    families: tuple = ("mobius", "lemma2")

    def doubled(self) -> "Budget":
        return replace(
            self,
            n_max=2 * self.n_max,
            tau_max=2 * self.tau_max,
            n_tau=2 * self.n_tau,
            r_exp=2 * self.r_exp,
            grid=2 * self.grid,
        )

    def halved(self) -> "Budget":
        return replace(
            self,
            n_max=max(self.n_max // 2, 1),
            tau_max=self.tau_max / 2,
            n_tau=max(self.n_tau // 2, 1),
            r_exp=self.r_exp // 2,
            grid=max(self.grid // 2, 1),
        )

    @classmethod
    def from_any(cls, budget) -> "Budget":
        if budget is None:
            return cls()
        if isinstance(budget, cls):
            return budget
        unknown = set(budget) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown budget keys: {sorted(unknown)}")
        kw = dict(budget)
        if "families" in kw:
            kw["families"] = tuple(kw["families"])
            bad = set(kw["families"]) - {"mobius", "lemma2"}
            if bad:
                raise ValueError(f"unknown chain families: {sorted(bad)}")
        return cls(**kw)


# -- segment families ------------------------------------------------------------------


def _half_log_ratio(u: float, lo: float, hi: float) -> float:
    # artanh of the affine map (lo, hi) -> (-1, 1)
    return 0.5 * math.log((u - lo) / (hi - u))


def _mobius_candidates(br: _Branch, ua: float, ub: float, b: Budget):
    """Segments through the affine chart V -> (-1, 1) followed by a translation.

    Any Moebius map of V onto (-1, 1) is the affine one composed with an
    automorphism of (-1, 1); the orientation-preserving automorphisms fixing
    the ends are t -> tanh(artanh t - tau).
    """
    lo, hi = br.u_range()
    d = ub - ua
    if math.isfinite(lo) and math.isfinite(hi):
        windows = [(lo, hi)]
    else:
        windows = []
        for j in range(b.r_exp + 1):
            r = 2.0**j * d
            windows.append((max(lo, ua - r), min(hi, ub + r)))
    for vlo, vhi in windows:
        if not vlo < ua < ub < vhi:
            continue
        al, be = _half_log_ratio(ua, vlo, vhi), _half_log_ratio(ub, vlo, vhi)
        for j in range(b.n_tau + 1):
            tau = b.tau_max * j / b.n_tau
            ta, tb = math.tanh(al - tau), math.tanh(be - tau)
            if not -1.0 < ta < tb < 1.0:
                continue
            yield ta, tb, {"family": "mobius", "V": [vlo, vhi], "tau": tau}


def _lemma2_candidates(br: _Branch, ua: float, ub: float, b: Budget):
    if not br.full_sweep:
        return
    n = b.n_max
    while n >= 1:
        yield -0.5 / n, 0.5 / n, {"family": "lemma2", "n": n, "u0": ua, "u1": ub}
        n //= 2


def _segment_map(br: _Branch, path: GeodesicPath, spec: dict) -> Callable:
    if spec["family"] == "mobius":
        vlo, vhi = spec["V"]
        tau = spec["tau"]

        def u_of(t):
            w = math.tanh(math.atanh(t) + tau)
            return vlo + 0.5 * (w + 1.0) * (vhi - vlo)

    else:
        n, u0, u1 = spec["n"], spec["u0"], spec["u1"]

        def u_of(t):
            return u0 + (n * t + 0.5) * (u1 - u0)

    def f(t):
        _check_unit(float(t))
        return path.point_at(br.s_of(u_of(float(t))))

    return f


def _best_edge(branches, sa: float, sb: float, b: Budget, k: float):
    best = None
    for br in branches:
        if not (br.contains(sa) and br.contains(sb)):
            continue
        ua, ub = br.u(sa), br.u(sb)
        if not ub > ua:
            continue
        gens = {"mobius": _mobius_candidates, "lemma2": _lemma2_candidates}
        for gen in (gens[name] for name in b.families):
            for ta, tb, spec in gen(br, ua, ub, b):
                c = funk_distance(ta, tb, k)
                if best is None or c < best[0]:
                    best = (c, ta, tb, br, spec)
    return best


def _nodes(branches, s1: float, grid: int) -> list[float]:
    nodes = set(np.linspace(0.0, s1, grid + 1).tolist())
    for fam in {br.label for br in branches}:
        ends = sorted({e for br in branches if br.label == fam for e in (br.a, br.b)})
        for z0, z1 in zip(ends[:-1], ends[1:]):
            mid = 0.5 * (z0 + z1)
            if 0.0 < mid < s1:
                nodes.add(mid)
    # interlacing zeros of the two ratios: their midpoints sit in overlaps
    zeros = sorted({e for br in branches for e in (br.a, br.b) if 0.0 < e < s1})
    for z0, z1 in zip(zeros[:-1], zeros[1:]):
        nodes.add(0.5 * (z0 + z1))
    nodes.update([0.0, s1])
    return sorted(nodes)


def _search(branches, s1: float, b: Budget, k: float):
    """Cheapest chain along the sampled geodesic from s = 0 to s = s1 (DP on nodes)."""
    nodes = _nodes(branches, s1, b.grid)
    N = len(nodes)
    cost = [math.inf] * N
    back: list = [None] * N
    cost[0] = 0.0
    for j in range(1, N):
        for i in range(j):
            if not math.isfinite(cost[i]):
                continue
            e = _best_edge(branches, nodes[i], nodes[j], b, k)
            if e is not None and cost[i] + e[0] < cost[j]:
                cost[j] = cost[i] + e[0]
                back[j] = (i, e)
    if not math.isfinite(cost[-1]):
        return math.inf, []
    steps = []
    j = N - 1
    while j:
        i, e = back[j]
        steps.append((nodes[i], nodes[j], e))
        j = i
    return cost[-1], steps[::-1]


# -- shooting ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Shot:
    direction: np.ndarray
    length: float
    miss: float


def _closest_approach(path: GeodesicPath, y: np.ndarray):
    d = np.linalg.norm(path.x_samples - y, axis=1)
    i = int(np.argmin(d))
    g = path.s_grid
    lo, hi = g[max(i - 1, 0)], g[min(i + 1, len(g) - 1)]
    res = minimize_scalar(
        lambda s: float(np.linalg.norm(path.point_at(s) - y)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-13},
    )
    s = float(res.x)
    v = path.v_samples[i]
    # the bounded search leaves ~sqrt(eps) along the track; finish with Newton
    for _ in range(3):
        r = y - path.point_at(s)
        s = min(max(s + float(v @ r) / float(v @ v), lo), hi)
    return s, path.point_at(s), v


def _chord_length(m: FinslerMetric, x, y) -> float:
    d = y - x
    val, _ = quad(lambda t: float(m.func(x + t * d, d)), 0.0, 1.0, limit=200)
    return val


def shoot_geodesic(m: FinslerMetric, x, y, h: float = 0.02, tol: float = SHOOT_TOL) -> Shot:
    """Initial unit direction at x of a forward geodesic through y.

    Tries the chord direction first (exact for projectively flat metrics);
    in dimension 2 it then brackets the signed miss in the initial angle and
    solves with Brent's method.  The integration length is capped by the
    F-length of the chord, which bounds the forward distance from above.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    steps = int(math.ceil((1.25 * _chord_length(m, x, y) + 0.1) / h))
    s_lim = steps * h

    def trial(direction):
        path = integrate_geodesic(m, x, direction, s_lim, h, on_drift="stop")
        s, p, v = _closest_approach(path, y)
        return path, s, p, v

    chord = (y - x) / np.linalg.norm(y - x)
    path, s, p, v = trial(chord)
    if np.linalg.norm(p - y) <= tol:
        return Shot(chord / float(m.func(x, chord)), s, float(np.linalg.norm(p - y)))
    if m.dim != 2:
        raise NoGeodesicFound("shooting beyond the chord direction is implemented for n = 2 only")

    def direction(theta):
        return np.array([math.cos(theta), math.sin(theta)])

    def miss(theta):
        _, _, p, v = trial(direction(theta))
        r = y - p
        return float(v[0] * r[1] - v[1] * r[0])

    th0 = math.atan2(chord[1], chord[0])
    delta = 0.05
    while delta < math.pi:
        lo, hi = th0 - delta, th0 + delta
        flo, fhi = miss(lo), miss(hi)
        if flo * fhi < 0:
            th = brentq(miss, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            dvec = direction(th)
            _, s, p, _ = trial(dvec)
            err = float(np.linalg.norm(p - y))
            if err <= tol:
                return Shot(dvec / float(m.func(x, dvec)), s, err)
        delta *= 2.5
    raise NoGeodesicFound(f"no initial direction at {x.tolist()} reaches {y.tolist()} within {tol}")


# -- estimator -------------------------------------------------------------------------------


@dataclass
class PseudoDistanceEstimate:
    x: np.ndarray
    y: np.ndarray
    upper_bound: float
    chain: Chain
    slack: float
    budget: Budget
    miss: float = 0.0

    def to_dict(self) -> dict:
        return {
            "x": [float(v) for v in self.x],
            "y": [float(v) for v in self.y],
            "upper_bound": self.upper_bound,
            "chain": self.chain.to_list(),
            "budget_used": {
                **asdict(self.budget),
                "families": list(self.budget.families),
                "slack": self.slack,
                "endpoint_miss": self.miss,
            },
        }


def _build_chain(steps, path: GeodesicPath, k: float) -> Chain:
    segs = []
    for sa, sb, (_, ta, tb, br, spec) in steps:
        full = {"branch": br.label, "s_interval": [br.a, br.b], "s_from": sa, "s_to": sb, **spec}
        segs.append(ChainSegment(ta, tb, path.point_at(sa), path.point_at(sb), full, _segment_map(br, path, spec)))
    return Chain(segs)


def _geodesic_window(m: FinslerMetric, x, y, b: Budget):
    shot = shoot_geodesic(m, x, y, b.h)
    ext = math.ceil(b.window / b.h) * b.h
    fwd = math.ceil((shot.length + b.window) / b.h) * b.h
    path = integrate_geodesic_line(m, x, shot.direction, ext, fwd, b.h, on_drift="stop")
    if path.s_grid[-1] < shot.length:
        raise NoGeodesicFound("geodesic window stops before reaching the target point")
    path = q_along(m, path, b.q_stride)
    return shot, path


def _all_branches(path: GeodesicPath, b: Budget) -> list[_Branch]:
    pp = projective_parameter(path)
    branches = _canonical_branches(pp)
    span = path.s_grid[-1] - path.s_grid[0]
    if span >= MIN_SWEEP_WINDOW and not path.chart_exit and not path.stop_reason:
        branches += _sweep_branches(path, b.h)
    return branches


def estimate_pseudo_distance(m: FinslerMetric, x, y, budget=None, k: float = 1.0) -> PseudoDistanceEstimate:
    """Upper bound for d_M(x, y) from the cheapest chain in a finite family.

    The family lives on the geodesic from x through y: single segments on
    every pole-free branch of the projective parameter, reparametrised by
    Moebius maps (affine chart of a sub-window, then a translation of the
    model interval up to ``tau_max``), scaling chains ``n <= n_max`` on
    branches where the parameter sweeps the whole line, and multi-segment
    chains through a grid of intermediate nodes.  ``slack`` is how much the
    last doubling of the budget improved the bound.
    """
    b = Budget.from_any(budget)
    _check_k(k)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    for p in (x, y):
        if not m.in_chart(p):
            raise DomainError(f"point {p.tolist()} outside chart")
    if np.array_equal(x, y):
        return PseudoDistanceEstimate(x, y, 0.0, Chain(), 0.0, b)
    shot, path = _geodesic_window(m, x, y, b)
    branches = _all_branches(path, b)
    best, steps = _search(branches, shot.length, b, k)
    half, _ = _search(branches, shot.length, b.halved(), k)
    if not math.isfinite(best):
        raise NoGeodesicFound("no chain of projective segments joins the points")
    chain = _build_chain(steps, path, k)
    ub = chain_length(chain, k)
    return PseudoDistanceEstimate(x, y, ub, chain, max(half - best, 0.0), b, shot.miss)


def directed_estimates(m: FinslerMetric, x, y, budget=None, k: float = 1.0):
    """(estimate x -> y, estimate y -> x); the two may differ for non-reversible F."""
    return estimate_pseudo_distance(m, x, y, budget, k), estimate_pseudo_distance(m, y, x, budget, k)


def lemma2_chain(
    path: GeodesicPath, pp: ProjectiveParameter, u0: float, u1: float, n: int, unbounded=(False, False)
) -> Chain:
    """Single segment ``t -> x(u0 + (n t + 1/2)(u1 - u0))`` with ends -+1/(2n).

    The map is defined on all of (-1, 1) only when p = y1/y2 sweeps the real
    line on the branch holding u0 and u1: both branch ends must be poles of
    p, or window edges flagged in ``unbounded`` (certified nonoscillatory).
    The numeric map itself is evaluable only where the path is sampled.
    """
    if n < 1 or int(n) != n:
        raise ValueError("n must be a positive integer")
    if u0 == u1:
        raise ValueError("u0 and u1 must differ")
    y1, y2 = pp.pair
    for br in _branches(y1, y2, "y1/y2", 1.0, unbounded):
        g = br.den.s_grid
        inside = (g > br.a) & (g < br.b)
        if br.a_pole is False:
            inside |= g == br.a
        if br.b_pole is False:
            inside |= g == br.b
        vals = y1.y_samples[inside] / y2.y_samples[inside]
        if vals.size < 2 or not (vals.min() <= min(u0, u1) and max(u0, u1) <= vals.max()):
            continue
        sgn = 1.0 if vals[-1] > vals[0] else -1.0
        br = replace(br, sign=sgn)
        if sgn < 0:
            br = replace(br, lo_inf=br.hi_inf, hi_inf=br.lo_inf)
        if not br.full_sweep:
            raise ParameterNotGlobal(
                f"projective parameter on ({br.a:.6g}, {br.b:.6g}) does not sweep the real line"
            )
        spec = {"family": "lemma2", "n": int(n), "u0": sgn * u0, "u1": sgn * u1}
        f = _segment_map(br, path, spec)
        sa, sb = br.s_of(sgn * u0), br.s_of(sgn * u1)
        full = {"branch": "y1/y2", "s_interval": [br.a, br.b], "s_from": sa, "s_to": sb, **spec}
        return Chain([ChainSegment(-0.5 / n, 0.5 / n, path.point_at(sa), path.point_at(sb), full, f)])
    raise ParameterNotGlobal(f"no branch of the projective parameter contains both {u0} and {u1}")


def pseudo_distance_axioms_report(m: FinslerMetric, points, budget=None, k: float = 1.0) -> dict:
    """Identity, asymmetry and (slack-tolerant) triangle checks on estimates."""
    pts = [np.asarray(p, float) for p in points]
    if len(pts) < 3:
        raise ValueError("need at least three points")
    est = {}
    for i, j in permutations(range(len(pts)), 2):
        est[(i, j)] = estimate_pseudo_distance(m, pts[i], pts[j], budget, k)
    identity = [estimate_pseudo_distance(m, p, p, budget, k).upper_bound for p in pts]
    triangles = []
    for i, j, l in permutations(range(len(pts)), 3):
        lhs = est[(i, l)].upper_bound
        rhs = est[(i, j)].upper_bound + est[(j, l)].upper_bound
        slack = 2.0 * max(est[(i, l)].slack, est[(i, j)].slack, est[(j, l)].slack)
        triangles.append(
            {"x": i, "y": j, "z": l, "lhs": lhs, "rhs": rhs, "slack": slack, "holds": bool(lhs <= rhs + slack)}
        )
    asym = max(abs(est[(i, j)].upper_bound - est[(j, i)].upper_bound) for i, j in est)
    return {
        "identity": identity,
        "identity_ok": all(v == 0.0 for v in identity),
        "estimates": {f"{i}->{j}": e.upper_bound for (i, j), e in est.items()},
        "slack": {f"{i}->{j}": e.slack for (i, j), e in est.items()},
        "max_asymmetry": asym,
        "triangles": triangles,
        "triangle_ok": all(t["holds"] for t in triangles),
    }


def estimate_json(e: PseudoDistanceEstimate) -> str:
    return json.dumps(e.to_dict(), indent=2, sort_keys=True)
