"""Arc-length geodesic integration and Q(s) sampling."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .curvature import _spray_values, ricci_scalar_fast
from .errors import ChartExit, DomainError, StepTooLarge, ZeroVector
from .metrics import FinslerMetric, reversed_metric

BOUNDARY_MARGIN = 1e-4
DRIFT_LIMIT = 1e-4


@dataclass(frozen=True)
class GeodesicPath:
    s_grid: np.ndarray
    x_samples: np.ndarray  # (N, n)
    v_samples: np.ndarray  # (N, n), dx/ds
    q_samples: np.ndarray | None = None
    chart_exit: bool = False
    metric_name: str = ""
    stop_reason: str = ""

    @property
    def dim(self) -> int:
        return self.x_samples.shape[1]

    def speed_drift(self, m: FinslerMetric) -> float:
        return max(abs(float(m.func(x, v)) - 1.0) for x, v in zip(self.x_samples, self.v_samples))

    def point_at(self, s: float) -> np.ndarray:
        """Cubic Hermite interpolation of x(s) using the stored velocities."""
        g = self.s_grid
        if not g[0] <= s <= g[-1]:
            raise DomainError(f"s={s} outside sampled range [{g[0]}, {g[-1]}]")
        i = min(max(int(np.searchsorted(g, s)) - 1, 0), len(g) - 2)
        h = g[i + 1] - g[i]
        t = (s - g[i]) / h
        h00 = 2 * t**3 - 3 * t**2 + 1
        h10 = t**3 - 2 * t**2 + t
        h01 = -2 * t**3 + 3 * t**2
        h11 = t**3 - t**2
        x, v = self.x_samples, self.v_samples
        return h00 * x[i] + h10 * h * v[i] + h01 * x[i + 1] + h11 * h * v[i + 1]

    def write_csv(self, fh) -> None:
        n = self.dim
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s"] + [f"x{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)] + ["Q"])
        q = self.q_samples
        for k, s in enumerate(self.s_grid):
            row = [s, *self.x_samples[k], *self.v_samples[k]]
            row = [format(float(v), ".17g") for v in row]
            row.append(format(float(q[k]), ".17g") if q is not None else "")
            w.writerow(row)


def _near_boundary(m: FinslerMetric, x) -> bool:
    if m.chart != "ball":
        return False
    return float(np.linalg.norm(x)) > 1.0 - BOUNDARY_MARGIN


def integrate_geodesic(
    m: FinslerMetric,
    x0,
    y0,
    s_max: float,
    h: float = 1e-3,
    strict: bool = False,
    on_drift: str = "raise",
) -> GeodesicPath:
    """Classical RK4 on (x, v) with ``x'' + G(x, x') = 0``, fixed step ``h``.

    ``y0`` is rescaled to unit F-length and ``h`` is adjusted slightly so an
    integer number of steps ends at ``s_max``.  Near a ball-chart boundary the
    integration stops and the partial path is returned with
    ``chart_exit=True`` (or :class:`ChartExit` is raised when ``strict``).
    With ``on_drift="stop"`` excessive speed drift truncates the path
    instead of raising :class:`StepTooLarge`.
    """
    x0 = np.asarray(x0, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    if not m.in_chart(x0):
        raise DomainError(f"x0={x0} outside chart")
    if not np.any(y0):
        raise ZeroVector("initial direction is zero")
    F0 = float(m.func(x0, y0))
    if not F0 > 0:
        raise DomainError("F(x0, y0) must be positive")
    v0 = y0 / F0
    steps = max(int(round(s_max / h)), 1)
    h = s_max / steps  # land exactly on s_max
    n = m.dim
    xs = np.empty((steps + 1, n))
    vs = np.empty((steps + 1, n))
    xs[0], vs[0] = x0, v0
    x, v = x0, v0
    exited = False
    last = steps
    reason = ""

    def acc(x, v):
        return -_spray_values(m, x, v)

    for k in range(steps):
        try:
            k1x, k1v = v, acc(x, v)
            x2 = x + 0.5 * h * k1x
            k2x, k2v = v + 0.5 * h * k1v, acc(x2, v + 0.5 * h * k1v)
            x3 = x + 0.5 * h * k2x
            k3x, k3v = v + 0.5 * h * k2v, acc(x3, v + 0.5 * h * k2v)
            x4 = x + h * k3x
            k4x, k4v = v + h * k3v, acc(x4, v + h * k3v)
        except ValueError:
            # stage point left the domain of F
            exited, last, reason = True, k, "domain"
            break
        x = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if _near_boundary(m, x):
            exited, last, reason = True, k, "boundary"
            break
        drift = abs(float(m.func(x, v)) - 1.0)
        if drift > DRIFT_LIMIT:
            if on_drift == "stop":
                last, reason = k, "drift"
                break
            raise StepTooLarge(f"unit-speed drift {drift:.3g} at s={(k + 1) * h:.4g}; reduce h")
        xs[k + 1], vs[k + 1] = x, v
    path = GeodesicPath(
        s_grid=np.arange(last + 1) * h,
        x_samples=xs[: last + 1],
        v_samples=vs[: last + 1],
        chart_exit=exited,
        metric_name=m.name,
        stop_reason=reason,
    )
    if exited and strict:
        raise ChartExit(f"chart boundary reached at s={last * h:.6g}", path=path)
    return path


def integrate_geodesic_line(
    m: FinslerMetric, x0, y0, s_back: float, s_fwd: float, h: float = 1e-3, on_drift: str = "raise"
) -> GeodesicPath:
    """Geodesic through x0 on s in [-s_back, s_fwd] with x'(0) parallel to y0.

    The backward half is the forward geodesic of the reversed metric
    F(x, -y) started at -y0, then re-parametrised by s -> -s.
    """
    fwd = integrate_geodesic(m, x0, y0, s_fwd, h, on_drift=on_drift)
    if s_back <= 0:
        return fwd
    bwd = integrate_geodesic(reversed_metric(m), x0, -np.asarray(y0, float), s_back, h, on_drift=on_drift)
    s = np.concatenate([-bwd.s_grid[:0:-1], fwd.s_grid])
    x = np.concatenate([bwd.x_samples[:0:-1], fwd.x_samples])
    v = np.concatenate([-bwd.v_samples[:0:-1], fwd.v_samples])
    reason = ",".join(r for r in (bwd.stop_reason, fwd.stop_reason) if r)
    return GeodesicPath(
        s, x, v, chart_exit=fwd.chart_exit or bwd.chart_exit, metric_name=m.name, stop_reason=reason
    )


def _unit_ricci(m: FinslerMetric, x, v) -> float:
    return ricci_scalar_fast(m, x, v / float(m.func(x, v)))


def q_along(m: FinslerMetric, path: GeodesicPath, stride: int = 1) -> GeodesicPath:
    """Attach Q(s) = Ric_ij x'^i x'^j / (n - 1) = Ric(x, x') / (n - 1).

    Ric is evaluated at the unit tangent x'/F(x, x'), so the integrator's
    small unit-speed drift does not leak into Q.
    With ``stride > 1`` Q is evaluated on every ``stride``-th node (plus the
    last) and filled in by a cubic spline.
    """
    n = m.dim
    idx = np.arange(0, len(path.s_grid), max(int(stride), 1))
    if idx[-1] != len(path.s_grid) - 1:
        idx = np.append(idx, len(path.s_grid) - 1)
    q = np.array([_unit_ricci(m, path.x_samples[i], path.v_samples[i]) for i in idx]) / (n - 1)
    if len(idx) < len(path.s_grid):
        if len(idx) >= 4:
            q = CubicSpline(path.s_grid[idx], q)(path.s_grid)
        else:
            q = np.interp(path.s_grid, path.s_grid[idx], q)
    return replace(path, q_samples=q)
