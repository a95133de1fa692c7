"""Oscillation theory for y'' + Q y = 0 on finite windows.

Infinite-horizon properties are judged from a finite window and reported
honestly: a verdict is ``Inconclusive`` when the window does not settle it.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import CoverageGap, NotNonoscillatory
from .projective import (
    LinearOdeSolution,
    ProjectiveParameter,
    ratio_parameter,
    solve_linear_ode,
    wronskian,
)

DEFAULT_WINDOW = (-40.0, 40.0)
DEFAULT_STEP = 0.01
SWEEP_THRESHOLD = 10.0


class Verdict(str, enum.Enum):
    OSCILLATORY = "Oscillatory"
    NONOSCILLATORY = "Nonoscillatory"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class OscillationReport:
    direction: int  # +1 for s -> +inf, -1 for s -> -inf
    verdict: Verdict
    zeros: list[float]
    window: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "direction": "+inf" if self.direction > 0 else "-inf",
            "verdict": self.verdict.value,
            "zeros": self.zeros,
            "window": list(self.window),
        }


@dataclass
class IntervalCover:
    intervals: list[tuple[float, float]]
    param_choice: list[str]
    window: tuple[float, float]
    unbounded: list[tuple[bool, bool]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "intervals": [list(iv) for iv in self.intervals],
            "param_choice": self.param_choice,
            "window": list(self.window),
            "unbounded": [list(u) for u in self.unbounded],
        }

    def containing(self, s: float) -> list[int]:
        return [i for i, (a, b) in enumerate(self.intervals) if a < s < b]


def q_on_grid(q, grid: np.ndarray) -> np.ndarray:
    """Evaluate a Q provider (constant, callable or ``(s_grid, q_samples)``) on a grid."""
    if isinstance(q, tuple):
        s, qs = (np.asarray(a, float) for a in q)
        if grid[0] < s[0] - 1e-12 or grid[-1] > s[-1] + 1e-12:
            raise ValueError("grid extends beyond the sampled Q")
        return np.interp(grid, s, qs)
    if callable(q):
        return np.array([float(q(t)) for t in grid])
    return np.full(grid.shape, float(q))


def make_grid(window, h: float = DEFAULT_STEP) -> np.ndarray:
    lo, hi = window
    n = max(int(round((hi - lo) / h)), 4)
    return np.linspace(lo, hi, n + 1)


def find_zeros(sol: LinearOdeSolution) -> list[float]:
    return sol.zeros()


def _tail_ok(sol: LinearOdeSolution, direction: int, zeros, span: float) -> bool:
    g, y = sol.s_grid, np.abs(sol.y_samples)
    if direction > 0:
        start = zeros[-1] if zeros else g[0]
        mask = g > start
        tail_y = y[mask]
        length = g[-1] - start
    else:
        start = zeros[0] if zeros else g[-1]
        mask = g < start
        tail_y = y[mask][::-1]
        length = start - g[0]
    if length < 0.5 * span or tail_y.size < 2:
        return False
    # monotone non-decreasing |y| toward the edge, up to rounding
    d = np.diff(tail_y)
    return bool(np.all(d >= -1e-12 * np.maximum(tail_y[1:], 1.0)))


def _oscillates(zeros, direction: int, window) -> bool:
    if len(zeros) < 3:
        return False
    gaps = np.diff(zeros)
    edge_gap = window[1] - zeros[-1] if direction > 0 else zeros[0] - window[0]
    return bool(edge_gap <= 2.0 * gaps.max())


def classify_oscillation(q, direction: int, window=DEFAULT_WINDOW, h: float = DEFAULT_STEP, extend: bool = True):
    """Decide (on a finite window) whether y'' + Q y = 0 oscillates toward +-inf.

    Two solutions anchored at the window centre, (1, 0) and (0, 1), are
    integrated.  ``Oscillatory``: at least three zeros continuing to the
    window edge.  ``Nonoscillatory``: some solution has a zero-free tail of at
    least half the window on which |y| grows monotonically.  Otherwise the
    window is doubled once, then ``Inconclusive``.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    window = (float(window[0]), float(window[1]))
    span = window[1] - window[0]
    if span < 20:
        raise ValueError("window length must be >= 20")
    grid = make_grid(window, h)
    qs = q_on_grid(q, grid)
    anchor = len(grid) // 2
    sols = [solve_linear_ode(grid, qs, 1.0, 0.0, anchor), solve_linear_ode(grid, qs, 0.0, 1.0, anchor)]
    zero_lists = [s.zeros() for s in sols]
    zeros = zero_lists[0]
    if _oscillates(zeros, direction, window):
        verdict = Verdict.OSCILLATORY
    elif any(_tail_ok(s, direction, z, span) for s, z in zip(sols, zero_lists)):
        verdict = Verdict.NONOSCILLATORY
    elif extend and not isinstance(q, tuple):
        c = 0.5 * (window[0] + window[1])
        return classify_oscillation(q, direction, (c - span, c + span), h, extend=False)
    else:
        verdict = Verdict.INCONCLUSIVE
    return OscillationReport(direction, verdict, zeros, window)


def principal_solution(q, direction: int, window=DEFAULT_WINDOW, h: float = DEFAULT_STEP) -> LinearOdeSolution:
    """Principal solution toward ``direction`` by integrating back from the far edge.

    The far-edge data sit on the smaller Riccati branch, y'/y = -sqrt(max(-Q, 0))
    (mirrored for -inf); backward integration makes the decaying branch
    attracting, so the start value only needs to be roughly right.
    """
    rep = classify_oscillation(q, direction, window, h)
    if rep.verdict is not Verdict.NONOSCILLATORY:
        raise NotNonoscillatory(f"equation is {rep.verdict.value} toward {direction:+d} inf")
    grid = make_grid(window, h)
    qs = q_on_grid(q, grid)
    if direction > 0:
        w = -np.sqrt(max(-qs[-1], 0.0))
        sol = solve_linear_ode(grid, qs, 1.0, w, len(grid) - 1)
    else:
        w = np.sqrt(max(-qs[0], 0.0))
        sol = solve_linear_ode(grid, qs, 1.0, w, 0)
    return sol


def independent_partner(sol: LinearOdeSolution, q, at: int | None = None) -> LinearOdeSolution:
    """A solution with W(partner, sol) > 0, anchored at node ``at`` (default: centre)."""
    g = sol.s_grid
    at = len(g) // 2 if at is None else at
    y, yp = sol.y_samples[at], sol.yp_samples[at]
    nrm = np.hypot(y, yp)
    # W = z' y - z y' with (z, z') = (-yp, y)/nrm gives W = nrm > 0
    return solve_linear_ode(g, q_on_grid(q, g), -yp / nrm, y / nrm, at)


def principal_ratio(sol: LinearOdeSolution, q, direction: int) -> float:
    """|y2/y1| at the window edge in ``direction`` for an independent partner y1."""
    other = independent_partner(sol, q)
    k = -1 if direction > 0 else 0
    return float(abs(sol.y_samples[k] / other.y_samples[k]))


def separation_holds(zeros_u, zeros_v) -> bool:
    """Strict interlacing: exactly one zero of v between consecutive zeros of u."""
    zv = np.asarray(zeros_v)
    for a, b in zip(zeros_u[:-1], zeros_u[1:]):
        if np.count_nonzero((zv > a) & (zv < b)) != 1:
            return False
    return True


def comparison_defect(q1, q2, a: float, ratio0: float, length: float = 20.0, h: float = DEFAULT_STEP) -> float:
    """Max of (y1'/y1 - y2'/y2)^+ for s > a while both stay zero-free.

    Solutions of y'' + q1 y = 0 and y'' + q2 y = 0 start with equal
    logarithmic derivative ``ratio0`` at ``a``; when q1 >= q2 the ordering
    y1'/y1 <= y2'/y2 should persist, so the result should be <= 0 up to
    rounding.
    """
    grid = make_grid((a, a + length), h)
    y1 = solve_linear_ode(grid, q_on_grid(q1, grid), 1.0, ratio0)
    y2 = solve_linear_ode(grid, q_on_grid(q2, grid), 1.0, ratio0)
    worst = 0.0
    for k in range(1, len(grid)):
        if y1.y_samples[k] * y1.y_samples[0] <= 0 or y2.y_samples[k] * y2.y_samples[0] <= 0:
            break
        r1 = y1.yp_samples[k] / y1.y_samples[k]
        r2 = y2.yp_samples[k] / y2.y_samples[k]
        worst = max(worst, r1 - r2)
    return worst


# -- oscillation case analysis -------------------------------------------------


def sweep_pair(q, window=DEFAULT_WINDOW, h: float = DEFAULT_STEP):
    """Pick (numerator, denominator) solutions according to the oscillation case.

    * oscillatory at both ends: canonical pair anchored at the centre;
    * nonoscillatory at +inf only: denominator principal at +inf;
    * nonoscillatory at -inf only: denominator principal at -inf;
    * nonoscillatory at both ends: denominator principal at +inf and
      numerator principal at -inf, unless these coincide (then any
      independent numerator).

    Returns ``(ProjectiveParameter, (report_minus, report_plus))``.
    """
    grid = make_grid(window, h)
    qs = q_on_grid(q, grid)
    rep_m = classify_oscillation(q, -1, window, h, extend=False)
    rep_p = classify_oscillation(q, +1, window, h, extend=False)
    non_m = rep_m.verdict is Verdict.NONOSCILLATORY
    non_p = rep_p.verdict is Verdict.NONOSCILLATORY
    if non_p:
        den = principal_solution(q, +1, window, h)
    elif non_m:
        den = principal_solution(q, -1, window, h)
    else:
        c = len(grid) // 2
        den = solve_linear_ode(grid, qs, 1.0, 0.0, c)
    num = None
    if non_p and non_m:
        cand = principal_solution(q, -1, window, h)
        w = wronskian(cand, den, "direct")
        c = len(grid) // 2
        scale = np.hypot(cand.y_samples[c], cand.yp_samples[c]) * np.hypot(den.y_samples[c], den.yp_samples[c])
        if abs(w[c]) > 1e-6 * scale:
            num = cand
    if num is None:
        num = independent_partner(den, q)
    return ratio_parameter(num, den, qs), (rep_m, rep_p)


def _sweeps(u: np.ndarray, lo_unbounded: bool, hi_unbounded: bool, thr: float) -> bool:
    # u restricted to the interior nodes of the interval, already sign-fixed
    if u.size < 2 or not np.all(np.isfinite(u)):
        return False
    if np.any(np.diff(u) <= 0):
        return False
    left_ok = u[0] <= -thr
    right_ok = u[-1] >= thr
    return bool(left_ok and right_ok)


def interval_decomposition(
    pp: ProjectiveParameter, reports, threshold: float = SWEEP_THRESHOLD, strict: bool = True
) -> IntervalCover:
    """Cover the window by intervals on which +-y1/y2 or +-y2/y1 sweeps (-inf, +inf).

    Candidate intervals lie between consecutive zeros of the denominator
    (ratio y1/y2) or of the numerator (ratio y2/y1); end pieces reaching the
    window edge are candidates only where that end is nonoscillatory.  Each
    candidate is kept when the sign-fixed ratio is increasing and exceeds
    ``threshold`` in magnitude at both ends.  Overlaps are kept.  With
    ``strict=False`` a cover with gaps is returned instead of raising.
    """
    rep_m, rep_p = reports
    g = pp.s_grid
    y1, y2 = pp.pair
    W = np.sign(wronskian(y1, y2)[len(g) // 2])
    non_m = rep_m.verdict is Verdict.NONOSCILLATORY
    non_p = rep_p.verdict is Verdict.NONOSCILLATORY
    families = [
        ("y1/y2", y1, y2, W),  # (y1/y2)' = W/y2^2
        ("y2/y1", y2, y1, -W),  # (y2/y1)' = -W/y1^2
    ]
    intervals, choices, flags = [], [], []
    firsts, lasts = [], []
    for label, num, den, sgn in families:
        zs = den.zeros()
        if zs:
            firsts.append(zs[0])
            lasts.append(zs[-1])
        ends = [(g[0], True)] + [(z, False) for z in zs] + [(g[-1], True)]
        for (a, a_edge), (b, b_edge) in zip(ends[:-1], ends[1:]):
            if (a_edge and not non_m) or (b_edge and not non_p):
                continue
            mask = (g > a) & (g < b)
            if a_edge:
                mask |= g == a
            if b_edge:
                mask |= g == b
            with np.errstate(divide="ignore", invalid="ignore"):
                u = sgn * num.y_samples[mask] / den.y_samples[mask]
            if _sweeps(u, a_edge, b_edge, threshold):
                intervals.append((float(a), float(b)))
                choices.append(("" if sgn > 0 else "-") + label)
                flags.append((a_edge, b_edge))
    lo = g[0] if non_m else (min(firsts) if firsts else g[0])
    hi = g[-1] if non_p else (max(lasts) if lasts else g[-1])
    order = np.argsort([iv[0] for iv in intervals]) if intervals else []
    cover = IntervalCover(
        [intervals[i] for i in order], [choices[i] for i in order], (float(lo), float(hi)), [flags[i] for i in order]
    )
    if strict:
        _check_coverage(cover)
    return cover


def _check_coverage(cover: IntervalCover) -> None:
    lo, hi = cover.window
    if not cover.intervals:
        raise CoverageGap(f"no interval on which a projective parameter sweeps the real line in [{lo}, {hi}]")
    reach = lo
    for a, b in cover.intervals:
        if a > reach + 1e-9:
            raise CoverageGap(f"gap in cover between {reach} and {a}")
        reach = max(reach, b)
    if reach < hi - 1e-9:
        raise CoverageGap(f"cover stops at {reach} < {hi}")


def report_json(reports, cover: IntervalCover | None) -> str:
    out = {"reports": [r.to_dict() for r in reports]}
    out["intervals"] = cover.to_dict() if cover is not None else None
    return json.dumps(out, indent=2, sort_keys=True)
