"""Command-line front end: ``finsler-pd <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 domain or runtime error.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import metrics as M
from .curvature import (
    berwald_parallel_defect,
    curvature_pack,
    riemann_curvature,
    ricci_scalar,
    ricci_tensor,
    theorem3_spray_comparison,
)
from .errors import ConfigError, FinslerError, NotConvex
from .geodesics import integrate_geodesic, integrate_geodesic_line, q_along
from .projective import projective_parameter
from .pseudodist import Budget, estimate_pseudo_distance, funk_distance
from .sturm import (
    Verdict,
    classify_oscillation,
    interval_decomposition,
    sweep_pair,
)

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_DOMAIN = 0, 1, 2, 3


def fmt(v) -> str:
    return format(float(v), ".17g")


# -- shared plumbing -----------------------------------------------------------------


def load_metric(spec: str, dim: int | None = None) -> M.FinslerMetric:
    """``spec`` is a zoo name or a path to a JSON descriptor."""
    if spec in M.ZOO or spec in M.EXTRA:
        desc = {"name": spec}
    else:
        path = Path(spec)
        if not path.is_file():
            raise ConfigError(f"--metric {spec!r} is neither a metric name nor a file")
        try:
            desc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"metric file is not valid JSON: {exc}") from exc
    if dim is not None:
        desc = {**desc, "dim": dim}
    return M.from_descriptor(desc)


def parse_vec(text: str | None, name: str):
    if text is None:
        return None
    try:
        vals = [float(t) for t in str(text).replace(";", ",").split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"{name} must be comma-separated numbers, got {text!r}") from exc
    if not vals or not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"{name} must be a non-empty list of finite numbers")
    return np.array(vals)


# config keys whose command-line option is stored under another name
_ALIASES = {"format": "fmt_", "q": "q_const", "x": "x_pt", "y": "y_pt"}


def merge_config(ctx: click.Context, allowed: set[str]) -> dict:
    """Command-line values, overridden by keys of an optional ``--config`` JSON."""
    params = dict(ctx.params)
    path = params.pop("config", None)
    if path:
        try:
            cfg = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(cfg) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key, val in cfg.items():
            if key == "metric" and isinstance(val, dict):
                params["metric_obj"] = M.from_descriptor(val)
            else:
                params[_ALIASES.get(key, key)] = val
    return params


def resolve_metric(p: dict) -> M.FinslerMetric:
    if "metric_obj" in p:
        return p["metric_obj"]
    return load_metric(p["metric"], p.get("dim"))


def emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def guarded(fn):
    """Map library exceptions onto the exit-code contract."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigError, click.BadParameter) as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except (FinslerError, ValueError, ArithmeticError) as exc:
            click.echo(f"{type(exc).__name__}: {exc}", err=True)
            sys.exit(EXIT_DOMAIN)

    return wrapper


def common(fn):
    fn = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)(fn)
    fn = click.option("--format", "fmt_", type=click.Choice(["csv", "json"]), default=None)(fn)
    fn = click.option("--out", type=click.Path(dir_okay=False), default=None, help="write here instead of stdout")(fn)
    fn = click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None)(fn)
    fn = click.option("--dim", type=click.IntRange(2, 4), default=None)(fn)
    fn = click.option("--metric", default="euclidean", show_default=True, help="zoo name or JSON descriptor file")(fn)
    return fn


@click.group()
def main():
    """Finsler curvature, projective parameters and pseudo-distance estimates."""


# -- curvature -----------------------------------------------------------------------------


@main.command()
@common
@click.option("--samples", type=click.IntRange(1, 10_000), default=10, show_default=True)
@click.option("--theorem3", is_flag=True, help="also compare the spray of sqrt(-Ric_ij y^i y^j)")
@click.pass_context
@guarded
def curvature(ctx, **_):
    """Table of F, Ric, min eigenvalue of Ric_ik and Berwald defects at random samples."""
    p = merge_config(ctx, {"metric", "dim", "samples", "theorem3", "seed", "format", "out"})
    m = resolve_metric(p)
    rng = np.random.default_rng(p["seed"])
    n = m.dim
    header = [f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(n)]
    header += ["F", "Ric", "eigmin_Ric_ik", "h_defect", "v_defect"]
    if p["theorem3"]:
        header += ["theorem3_defect", "F_hat"]
    rows = []
    for s in M.random_samples(m, p["samples"], rng):
        pack = curvature_pack(m, s)
        h, v = berwald_parallel_defect(m, s)
        row = [*s.x, *s.y, M.eval_metric(m, s), pack.ric_scalar, np.linalg.eigvalsh(pack.ric_tensor)[0], h, v]
        if p["theorem3"]:
            cmp = theorem3_spray_comparison(m, s)
            row += [cmp.defect, cmp.F_hat]
        rows.append([float(c) for c in row])
    if (p["fmt_"] or "csv") == "csv":
        emit(csv_text(header, [[fmt(c) for c in r] for r in rows]), p["out"])
    else:
        emit(dump_json({"metric": m.name, "dim": n, "rows": [dict(zip(header, r)) for r in rows]}), p["out"])


# -- geodesic ---------------------------------------------------------------------------------


@main.command()
@common
@click.option("--x0", default=None, help="start point, e.g. 0,0 (default: origin)")
@click.option("--y0", default=None, help="initial direction (default: e1)")
@click.option("--s-max", type=click.FloatRange(min=0, min_open=True), default=20.0, show_default=True)
@click.option("--h", type=click.FloatRange(min=0, min_open=True), default=1e-3, show_default=True)
@click.option("--q-stride", type=click.IntRange(0), default=10, show_default=True, help="0 skips Q")
@click.pass_context
@guarded
def geodesic(ctx, **_):
    """Arc-length geodesic trace with Q(s)."""
    p = merge_config(ctx, {"metric", "dim", "x0", "y0", "s_max", "h", "q_stride", "seed", "format", "out"})
    m = resolve_metric(p)
    x0, y0 = _start(m, p)
    path = integrate_geodesic(m, x0, y0, float(p["s_max"]), float(p["h"]))
    if p["q_stride"]:
        path = q_along(m, path, int(p["q_stride"]))
    if (p["fmt_"] or "csv") == "csv":
        buf = io.StringIO()
        path.write_csv(buf)
        emit(buf.getvalue(), p["out"])
    else:
        emit(
            dump_json(
                {
                    "metric": m.name,
                    "chart_exit": path.chart_exit,
                    "s": path.s_grid.tolist(),
                    "x": path.x_samples.tolist(),
                    "v": path.v_samples.tolist(),
                    "Q": None if path.q_samples is None else path.q_samples.tolist(),
                }
            ),
            p["out"],
        )


def _start(m, p):
    x0 = parse_vec(p.get("x0"), "x0")
    y0 = parse_vec(p.get("y0"), "y0")
    x0 = np.zeros(m.dim) if x0 is None else x0
    y0 = np.eye(m.dim)[0] if y0 is None else y0
    if len(x0) != m.dim or len(y0) != m.dim:
        raise ConfigError(f"x0 and y0 need {m.dim} components")
    return x0, y0


# -- projective parameter -------------------------------------------------------------------


@main.command()
@common
@click.option("--x0", default=None)
@click.option("--y0", default=None)
@click.option("--s-max", type=click.FloatRange(min=0, min_open=True), default=10.0, show_default=True)
@click.option("--s-back", type=click.FloatRange(min=0), default=0.0, show_default=True)
@click.option("--h", type=click.FloatRange(min=0, min_open=True), default=1e-2, show_default=True)
@click.option("--q-stride", type=click.IntRange(1), default=1, show_default=True)
@click.pass_context
@guarded
def projparam(ctx, **_):
    """Canonical projective parameter p = y1/y2 along a geodesic, with {p, s} and poles."""
    p = merge_config(
        ctx, {"metric", "dim", "x0", "y0", "s_max", "s_back", "h", "q_stride", "seed", "format", "out"}
    )
    m = resolve_metric(p)
    x0, y0 = _start(m, p)
    path = integrate_geodesic_line(m, x0, y0, float(p["s_back"]), float(p["s_max"]), float(p["h"]))
    pp = projective_parameter(q_along(m, path, int(p["q_stride"])))
    if (p["fmt_"] or "csv") == "csv":
        buf = io.StringIO()
        pp.write_csv(buf)
        emit(buf.getvalue(), p["out"])
    else:
        S = pp.schwarzian_samples()
        emit(
            dump_json(
                {
                    "metric": m.name,
                    "poles": [float(z) for z in pp.poles],
                    "s": pp.s_grid.tolist(),
                    "p": [None if np.isnan(v) else float(v) for v in pp.p_samples],
                    "Q": pp.q_samples.tolist(),
                    "schwarzian": [None if np.isnan(v) else float(v) for v in S],
                }
            ),
            p["out"],
        )


# -- oscillation ---------------------------------------------------------------------------------


@main.command()
@common
@click.option("--q", "q_const", type=float, default=None, help="constant Q; otherwise Q along a geodesic")
@click.option("--x0", default=None)
@click.option("--y0", default=None)
@click.option("--window", default="-40,40", show_default=True)
@click.option("--h", type=click.FloatRange(min=0, min_open=True), default=1e-2, show_default=True)
@click.option("--q-stride", type=click.IntRange(1), default=10, show_default=True)
@click.pass_context
@guarded
def oscillation(ctx, **_):
    """Oscillation verdicts at -inf and +inf and the sweep-interval cover."""
    p = merge_config(
        ctx, {"metric", "dim", "q", "x0", "y0", "window", "h", "q_stride", "seed", "format", "out"}
    )
    win = parse_vec(p["window"], "window")
    if win is None or len(win) != 2 or not win[1] - win[0] >= 20:
        raise ConfigError("window must be lo,hi with length >= 20")
    h = float(p["h"])
    if p["q_const"] is not None:
        q = float(p["q_const"])
        source = {"Q": q}
    else:
        m = resolve_metric(p)
        x0, y0 = _start(m, p)
        path = integrate_geodesic_line(m, x0, y0, -win[0], win[1], h)
        if path.chart_exit:
            raise ConfigError(
                f"geodesic leaves the chart inside the window (s in [{path.s_grid[0]:.6g}, {path.s_grid[-1]:.6g}])"
            )
        path = q_along(m, path, int(p["q_stride"]))
        q = (path.s_grid, path.q_samples)
        source = {"metric": m.name, "x0": x0.tolist(), "y0": y0.tolist()}
    window = (float(win[0]), float(win[1]))
    pp, reps = sweep_pair(q, window, h)
    cover, gap = None, None
    try:
        cover = interval_decomposition(pp, reps)
    except FinslerError as exc:
        gap = f"{type(exc).__name__}: {exc}"
    out = {
        "source": source,
        "reports": [r.to_dict() for r in reps],
        "intervals": None if cover is None else cover.to_dict(),
        "cover_error": gap,
    }
    if (p["fmt_"] or "json") == "json":
        emit(dump_json(out), p["out"])
    else:
        rows = [[r.to_dict()["direction"], r.verdict.value, "", "", ""] for r in reps]
        if cover is not None:
            for (a, b), choice in zip(cover.intervals, cover.param_choice):
                rows.append(["interval", "", fmt(a), fmt(b), choice])
        emit(csv_text(["kind", "verdict", "a", "b", "param"], rows), p["out"])


# -- pseudo-distance -------------------------------------------------------------------------------


@main.command()
@common
@click.option("--x", "x_pt", default=None, help="first point")
@click.option("--y", "y_pt", default=None, help="second point")
@click.option("--pairs", type=click.Path(exists=True, dir_okay=False), default=None, help="CSV of x1..xn,y1..yn rows")
@click.option("--budget", default=None, help="JSON object of budget overrides")
@click.option("--k", type=click.FloatRange(min=0, min_open=True), default=1.0, show_default=True)
@click.option("--both", is_flag=True, help="also estimate the reverse direction")
@click.pass_context
@guarded
def pseudodist(ctx, **_):
    """Upper bound for the pseudo-distance d_M(x, y) and the chain attaining it."""
    p = merge_config(
        ctx, {"metric", "dim", "x", "y", "pairs", "budget", "k", "both", "seed", "format", "out"}
    )
    m = resolve_metric(p)
    budget = p["budget"]
    if isinstance(budget, str):
        try:
            budget = json.loads(budget)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--budget is not valid JSON: {exc}") from exc
    try:
        budget = Budget.from_any(budget)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    k = float(p["k"])
    pairs = _pairs(m, p)
    results = []
    for x, y in pairs:
        e = estimate_pseudo_distance(m, x, y, budget, k)
        d = e.to_dict()
        if p["both"]:
            d["reverse"] = estimate_pseudo_distance(m, y, x, budget, k).to_dict()
        results.append(d)
    table = p["pairs"] is not None
    if (p["fmt_"] or ("csv" if table else "json")) == "json":
        emit(dump_json(results if table else results[0]), p["out"])
    else:
        n = m.dim
        header = [f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(n)] + ["upper_bound", "slack"]
        if p["both"]:
            header += ["reverse_upper_bound"]
        rows = []
        for d in results:
            row = [*d["x"], *d["y"], d["upper_bound"], d["budget_used"]["slack"]]
            if p["both"]:
                row.append(d["reverse"]["upper_bound"])
            rows.append([fmt(v) for v in row])
        emit(csv_text(header, rows), p["out"])


def _pairs(m, p):
    if p["pairs"]:
        out = []
        with open(p["pairs"], newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().startswith("#"):
                    continue
                try:
                    vals = [float(v) for v in row]
                except ValueError:
                    continue  # header
                if len(vals) != 2 * m.dim:
                    raise ConfigError(f"pair rows need {2 * m.dim} numbers")
                out.append((np.array(vals[: m.dim]), np.array(vals[m.dim :])))
        if not out:
            raise ConfigError("pairs file has no rows")
        return out
    x = parse_vec(p["x_pt"], "x")
    y = parse_vec(p["y_pt"], "y")
    if x is None or y is None:
        raise ConfigError("give --x and --y, or --pairs")
    if len(x) != m.dim or len(y) != m.dim:
        raise ConfigError(f"points need {m.dim} components")
    return [(x, y)]


# -- verify -------------------------------------------------------------------------------------------


def _rel(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / max(1.0, float(np.max(np.abs(b)))))


def verify_metric(m: M.FinslerMetric, samples: int, rng) -> list[dict]:
    rows = []

    def record(check, value, tol):
        rows.append({"metric": m.name, "check": check, "value": value, "tol": tol, "pass": bool(value <= tol)})

    pts = M.random_samples(m, samples, rng)
    rep = M.check_homogeneity(m, pts)
    record("homogeneity", rep.defect, 1e-10)
    try:
        euler = 0.0
        for s in pts:
            g = M.fundamental_tensor(m, s)
            y = np.asarray(s.y)
            F = M.eval_metric(m, s)
            euler = max(euler, abs(y @ g @ y - F * F) / (F * F))
        record("convexity", 0.0, 0.0)
        record("euler_gyy", euler, 1e-10)
    except NotConvex as exc:
        rows.append({"metric": m.name, "check": "convexity", "value": None, "tol": 0.0, "pass": False, "error": str(exc)})
        return rows
    flag = trace = 0.0
    for s in pts[: min(samples, 5)]:
        y = np.asarray(s.y)
        R = riemann_curvature(m, s)
        F2 = M.eval_metric(m, s) ** 2
        flag = max(flag, float(np.max(np.abs(R @ y))) / max(F2 * np.linalg.norm(y), 1e-300))
        ric = ricci_scalar(m, s)
        trace = max(trace, abs(y @ ricci_tensor(m, s) @ y - ric) / max(abs(ric), F2))
    record("flagpole_Ry", flag, 1e-8)
    record("ricci_tensor_trace", trace, 1e-8)
    return rows


def verify_global() -> list[dict]:
    rows = []
    d1 = abs(funk_distance(0.0, 0.5) - math.log(2.0))
    d2 = abs(funk_distance(0.5, 0.0) - math.log(1.5))
    rows.append({"metric": "-", "check": "funk_table", "value": max(d1, d2), "tol": 1e-12, "pass": max(d1, d2) <= 1e-12})
    worst = 0.0
    for qc in (1.0, 0.0, -1.0, -0.25):
        rep = classify_oscillation(qc, +1)
        expect = Verdict.OSCILLATORY if qc > 0 else Verdict.NONOSCILLATORY
        worst = max(worst, 0.0 if rep.verdict is expect else 1.0)
    rows.append({"metric": "-", "check": "oscillation_verdicts", "value": worst, "tol": 0.0, "pass": worst == 0.0})
    return rows


@main.command()
@common
@click.option("--samples", type=click.IntRange(1, 1000), default=10, show_default=True)
@click.option("--all-metrics/--only-metric", default=None, help="default: whole zoo unless --metric is given")
@click.pass_context
@guarded
def verify(ctx, **_):
    """Invariant suite; exit 1 when any check fails."""
    src = ctx.get_parameter_source("metric")
    p = merge_config(ctx, {"metric", "dim", "samples", "seed", "format", "out"})
    rng = np.random.default_rng(p["seed"])
    explicit = "metric_obj" in p or src is not click.core.ParameterSource.DEFAULT
    whole = p["all_metrics"] if p["all_metrics"] is not None else not explicit
    if whole:
        ms = [ctor(p["dim"] or 2) for ctor in M.ZOO.values()]
    else:
        ms = [resolve_metric(p)]
    rows = []
    for m in ms:
        rows += verify_metric(m, int(p["samples"]), rng)
    rows += verify_global()
    ok = all(r["pass"] for r in rows)
    if (p["fmt_"] or "json") == "json":
        emit(dump_json({"pass": ok, "checks": rows}), p["out"])
    else:
        table = [
            [r["metric"], r["check"], "" if r["value"] is None else fmt(r["value"]), fmt(r["tol"]), int(r["pass"])]
            for r in rows
        ]
        emit(csv_text(["metric", "check", "value", "tol", "pass"], table), p["out"])
    if not ok:
        sys.exit(EXIT_VERIFY)


if __name__ == "__main__":
    main()
