"""Command line front end: analyze, verify, drag, catalog.

One binary, four subcommands, machine-readable reports:

* ``analyze``  runs the full pipeline (frame, shape, classify, horizon
  verdict) over a surface grid and emits a report,
* ``verify``   runs one named residual suite and exits 1 when any residual
  beats its tolerance,
* ``drag``     flows a leaf along the rigging and emits the variation CSV,
* ``catalog``  lists the built-in surfaces and metrics.

Exit codes are strict: 0 all pass, 1 a tolerance or hard invariant failed,
2 the input could not be parsed or built.  Reports are deterministic: field
order is fixed, floats are printed with 17 significant digits, reruns are
byte-identical.

JSON report schema (tag ``nullrig-report-v1``): top-level keys ``schema``,
``command``, ``config``, ``aggregates``, then per command ``points`` (analyze:
one record per grid node with u, shape eigenvalues, expansions, class label
and the exact-invariant residual map), ``checks`` (verify: one record per
residual with value, tolerance, status) or ``rows`` (drag: epsilon, area and
mean expansions), and optionally ``verdict``.  The CSV flavor carries the
schema tag on a leading comment line followed by the documented header.
"""

from __future__ import annotations

import argparse
import dataclasses
import inspect
import json
import math
import os
import sys
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import analysis, catalogs, numerics, rigging, spacetime
from .hypersurface import Axis, FrameField, FrameTolerances, GeometryError

SCHEMA = "nullrig-report-v1"

SUITES = ("raychaudhuri", "codazzi", "rigging", "umbilic",
          "monge-oracle", "variation")

DEFAULT_GRID_N = 17
DEFAULT_EPSILONS = (-0.01, -0.005, 0.005, 0.01)


class ConfigError(Exception):
    """Anything wrong with the invocation itself (exit code 2)."""


# ---- configuration ---------------------------------------------------------------


@dataclass
class RunConfig:
    surface: str
    metric: Optional[str] = None
    grid: dict = field(default_factory=dict)
    tol_null: float = 1e-8
    tol_classify: float = 1e-7
    tol_curvature: float = 1e-4
    step_exact: Optional[float] = None
    step_noisy: Optional[float] = None
    seed: int = 7
    epsilons: tuple = DEFAULT_EPSILONS
    suite: Optional[str] = None
    output: Optional[str] = None
    fmt: str = "json"

    def validate(self):
        if not self.surface:
            raise ConfigError("a --surface is required")
        for name in ("tol_null", "tol_classify", "tol_curvature"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be positive")
        for name in ("step_exact", "step_noisy"):
            val = getattr(self, name)
            if val is not None and not val > 0.0:
                raise ConfigError(f"{name} must be positive")
        for axis, n in self.grid.items():
            if n < 5:
                raise ConfigError(
                    f"grid axis {axis}: need at least 5 points for the stencils")
        if self.fmt not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.suite is not None and self.suite not in SUITES:
            raise ConfigError(
                f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        if not self.epsilons:
            raise ConfigError("need at least one epsilon")
        return self

    def echo(self) -> dict:
        out = {
            "surface": self.surface,
            "metric": self.metric,
            "grid": {k: self.grid[k] for k in sorted(self.grid)},
            "tol_null": self.tol_null,
            "tol_classify": self.tol_classify,
            "tol_curvature": self.tol_curvature,
            "step_exact": self.step_exact,
            "step_noisy": self.step_noisy,
            "seed": self.seed,
            "epsilons": list(self.epsilons),
            "suite": self.suite,
            "format": self.fmt,
        }
        return out


def parse_grid(text: str) -> dict:
    """'t=8,theta=16' -> {'t': 8, 'theta': 16}; a bare name means 17."""
    out = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" in item:
            name, _, val = item.partition("=")
            try:
                out[name.strip()] = int(val)
            except ValueError:
                raise ConfigError(f"grid count {val!r} is not an integer")
        else:
            out[item] = DEFAULT_GRID_N
    return out


def parse_epsilons(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad epsilon list {text!r}")


@contextmanager
def _step_overrides(config: RunConfig):
    saved = (numerics.STEP_EXACT_BASE, numerics.STEP_NOISY_BASE)
    try:
        if config.step_exact is not None:
            numerics.STEP_EXACT_BASE = config.step_exact
        if config.step_noisy is not None:
            numerics.STEP_NOISY_BASE = config.step_noisy
        yield
    finally:
        numerics.STEP_EXACT_BASE, numerics.STEP_NOISY_BASE = saved


def _metric_from_spec(spec: str) -> spacetime.MetricSpec:
    if os.path.exists(spec) or spec.endswith(".metric") or os.sep in spec:
        try:
            return spacetime.load_metric(spec)
        except (OSError, spacetime.MetricFileError) as exc:
            raise ConfigError(f"cannot load metric file {spec!r}: {exc}")
    name, _, rest = spec.partition(":")
    cat = spacetime.metric_catalog()
    if name not in cat:
        raise ConfigError(
            f"unknown metric {name!r}; available: {', '.join(sorted(cat))}")
    positional = list(inspect.signature(cat[name]).parameters)
    kwargs: dict = {}
    for item in rest.split(",") if rest else []:
        key, eq, val = item.partition("=")
        if not eq:
            key, val = "", item
        val = val.strip()
        try:
            parsed = int(val)
        except ValueError:
            try:
                parsed = float(val)
            except ValueError:
                raise ConfigError(f"bad metric argument {item!r} in {spec!r}")
        key = key.strip()
        if not key:
            free = [p for p in positional if p not in kwargs]
            if not free:
                raise ConfigError(f"too many bare arguments in {spec!r}")
            key = free[0]
        kwargs[key] = parsed
    try:
        return cat[name](**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad metric arguments in {spec!r}: {exc}")


def _apply_grid(bundle, grid: dict):
    if not grid:
        return bundle
    names = {ax.name for ax in bundle.patch.axes}
    unknown = set(grid) - names
    if unknown:
        raise ConfigError(
            f"grid names {sorted(unknown)} not among surface axes {sorted(names)}")
    new_axes = tuple(
        dataclasses.replace(ax, n=grid.get(ax.name, ax.n))
        for ax in bundle.patch.axes)
    patch = dataclasses.replace(bundle.patch, axes=new_axes)
    monge = bundle.monge
    if monge is not None:
        monge = dataclasses.replace(monge, axes=new_axes)
    return dataclasses.replace(bundle, patch=patch, monge=monge)


def build_field(config: RunConfig):
    """(bundle, FrameField) for a validated config; ConfigError on bad input."""
    spec = _metric_from_spec(config.metric) if config.metric is not None else None
    try:
        bundle = catalogs.surface(config.surface)
        if (spec is not None and bundle.monge is not None
                and spec.dim > bundle.patch.ambient.dim
                and config.surface.startswith("monge:")):
            # a bare graph takes its dimension from the requested ambient;
            # pad the box with passive directions the expression skips
            axes = tuple(Axis(f"u{i}", 0.6, 1.4, 5) for i in range(1, spec.dim))
            _, kwargs = catalogs.parse_surface_spec(config.surface)
            bundle = catalogs.monge_graph(axes=axes, **kwargs)
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc))
    except GeometryError as exc:
        raise ConfigError(f"surface cannot be built: {exc}")
    bundle = _apply_grid(bundle, config.grid)
    if spec is not None:
        amb = bundle.patch.ambient
        if spec.dim != amb.dim:
            raise ConfigError(
                f"metric {spec.name} has dim {spec.dim}, surface ambient "
                f"{amb.name} has dim {amb.dim}")
        for u in (bundle.patch.interior_point(), bundle.patch.grid_points()[0]):
            x = bundle.patch.embed(u)
            if np.max(np.abs(spec.metric(x) - amb.metric(x))) > 1e-9:
                raise ConfigError(
                    f"metric {spec.name} disagrees with the surface ambient "
                    f"{amb.name} at {x.tolist()}")
    tol = FrameTolerances(null=config.tol_null, classify=config.tol_classify)
    try:
        ff = FrameField(bundle.patch, bundle.rigging, tol=tol)
    except GeometryError as exc:
        raise ConfigError(f"surface cannot be rigged: {exc}")
    return bundle, ff


# ---- report plumbing ----------------------------------------------------------------


def _plain(value):
    """Make a value JSON-serializable with deterministic structure."""
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _render(value) -> str:
    """JSON text with floats at 17 significant digits, insertion order kept."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return json.dumps(str(value))
        return format(value, ".17g")
    if isinstance(value, int):
        return str(value)
    if value is None:
        return "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        inner = ",".join(f"{json.dumps(str(k))}:{_render(v)}"
                         for k, v in value.items())
        return "{" + inner + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_render(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


@dataclass
class Report:
    command: str
    config: dict
    aggregates: dict
    points: Optional[list] = None
    checks: Optional[list] = None
    rows: Optional[list] = None
    verdict: Optional[dict] = None

    def as_dict(self) -> dict:
        out = {"schema": SCHEMA, "command": self.command, "config": self.config,
               "aggregates": self.aggregates}
        for key in ("points", "checks", "rows", "verdict"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        return out

    def to_json(self) -> str:
        return _render(_plain(self.as_dict())) + "\n"

    def to_csv(self) -> str:
        table = self.rows if self.rows is not None else (
            self.checks if self.checks is not None else self.points)
        if not table:
            raise ConfigError(f"{self.command}: nothing to tabulate as csv")
        lines = [f"# schema: {SCHEMA} {self.command}"]
        cols = list(table[0])
        lines.append(",".join(cols))
        for rec in table:
            cells = []
            for c in cols:
                v = rec.get(c)
                if isinstance(v, float):
                    cells.append(format(v, ".17g"))
                elif isinstance(v, (list, tuple, dict)):
                    cells.append('"' + ";".join(format(x, ".17g")
                                                if isinstance(x, float) else str(x)
                                                for x in (v.values() if isinstance(v, dict) else v)) + '"')
                else:
                    cells.append(str(v))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def report_emit(report: Report, fmt: str, path: Optional[str]) -> str:
    text = report.to_json() if fmt == "json" else report.to_csv()
    if path:
        try:
            with open(path, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write report to {path!r}: {exc}")
    return text


# ---- analyze ----------------------------------------------------------------------


def _analysis_nodes(ff: FrameField):
    """Evaluation nodes: leaf quadrature nodes when the patch has leaves
    (these stay clear of coordinate poles), else the raw grid."""
    if ff.patch.leaf_axis_indices():
        nodes = []
        for leaf in analysis.leaf_patches(ff):
            nodes.extend(leaf.lift(w) for w in leaf.nodes)
        return nodes
    return list(ff.patch.grid_points())


def _point_record(ff: FrameField, u) -> dict:
    sp = ff.shape(u)
    pc = ff.classify(u)
    eig = np.sort(np.linalg.eigvalsh(sp.A_xi_screen))
    return {
        "u": [float(v) for v in u],
        "eigenvalues": [float(v) for v in eig],
        "S1": float(sp.S1),
        "star_S1": float(sp.star_S1),
        "theta_out": float(sp.theta_out),
        "theta_in": float(sp.theta_in),
        "tau_of_xi": float(sp.tau_of_xi),
        "label": pc.label,
        "residuals": {k: float(sp.checks[k]) for k in sorted(sp.checks)},
    }


def _aggregate_points(points: list) -> dict:
    hist = Counter(rec["label"] for rec in points)
    res_max: dict = {}
    for rec in points:
        for k, v in rec["residuals"].items():
            res_max[k] = max(res_max.get(k, 0.0), abs(v))
    return {
        "points": len(points),
        "class_histogram": {k: hist[k] for k in sorted(hist)},
        "max_residuals": {k: res_max[k] for k in sorted(res_max)},
        "theta_out_range": [min(r["theta_out"] for r in points),
                            max(r["theta_out"] for r in points)],
        "theta_in_range": [min(r["theta_in"] for r in points),
                           max(r["theta_in"] for r in points)],
    }


_VALUE_KEYS = {"conformal_phi", "umbilic_rho"}  # fitted values, not residuals


def _identity_sample(ff: FrameField) -> dict:
    worst: dict = {}
    for u in ff.sample_points(2):
        for k, v in ff.structure_residuals(u).items():
            if isinstance(v, float) and k not in _VALUE_KEYS:
                worst[k] = max(worst.get(k, 0.0), abs(v))
    u0 = np.asarray(ff.patch.interior_point())
    for k, v in analysis.gauss_codazzi_residuals(ff, u0).items():
        worst[k] = max(worst.get(k, 0.0), v)
    worst["raychaudhuri"] = analysis.raychaudhuri_residual(ff, u0)
    worst["newton_trace"] = analysis.newton_trace_residual(ff, u0)
    return {k: worst[k] for k in sorted(worst)}


def _verdict_dict(ff: FrameField, bundle) -> dict:
    try:
        v = analysis.horizon_classify(ff)
    except analysis.LeafStructureError:
        if bundle.monge is not None:
            mr = bundle.monge.horizon_report()
            return {
                "kind": "graph",
                "labels": (["TRAPPING_HORIZON"] if mr.is_trapping_horizon else []),
                "trapping_horizon": mr.is_trapping_horizon,
                "max_abs_laplacian": mr.max_abs_laplacian,
                "null_defect": mr.null_defect,
                "band": mr.band,
            }
        return {"kind": "none", "labels": [],
                "note": "patch declares no closed leaves"}
    per_leaf = []
    for rec in v.per_leaf:
        row = {"label": list(rec["label"]),
               "max_theta_out": rec["max_theta_out"],
               "max_theta_in": rec["max_theta_in"],
               "area": rec["area"],
               "trapping": rec["trapping"],
               "future": rec["future"],
               "outer": rec["outer"]}
        if rec.get("delta_theta_out") is not None:
            row["delta_theta_out"] = rec["delta_theta_out"]
        per_leaf.append(row)
    return {
        "kind": "leafed",
        "labels": v.labels(),
        "trapping_horizon": v.trapping_horizon,
        "future": v.future,
        "outer": v.outer,
        "foth": v.foth,
        "minimal": v.minimal,
        "minimal_consistent": v.minimal_consistent,
        "band": v.band,
        "per_leaf": per_leaf,
    }


def run_analyze(config: RunConfig) -> tuple:
    bundle, ff = build_field(config)
    with _step_overrides(config):
        points = [_point_record(ff, u) for u in _analysis_nodes(ff)]
        aggregates = _aggregate_points(points)
        aggregates["identity_residuals"] = _identity_sample(ff)
        verdict = _verdict_dict(ff, bundle)
    report = Report(command="analyze", config=config.echo(),
                    aggregates=aggregates, points=points, verdict=verdict)
    return report, 0


# ---- verify -----------------------------------------------------------------------


def _check(name: str, value: float, tol: float, note: str = "") -> dict:
    return {"name": name, "value": float(value), "tolerance": float(tol),
            "status": "PASS" if abs(value) < tol else "FAIL", "note": note}


def _suite_raychaudhuri(config, bundle, ff):
    tol = config.tol_curvature
    rows = []
    for i, u in enumerate(ff.sample_points(2)):
        rows.append(_check(f"raychaudhuri[{i}]",
                           analysis.raychaudhuri_residual(ff, u), tol))
    u0 = np.asarray(ff.patch.interior_point())
    rows.append(_check("newton_trace", analysis.newton_trace_residual(ff, u0), tol))
    return rows


def _suite_codazzi(config, bundle, ff):
    tol = config.tol_curvature
    worst: dict = {}
    us = [np.asarray(ff.patch.interior_point())] + ff.sample_points(2)[:2]
    for u in us:
        for k, v in analysis.gauss_codazzi_residuals(ff, u).items():
            worst[k] = max(worst.get(k, 0.0), v)
    return [_check(k, worst[k], tol) for k in sorted(worst)]


def _suite_rigging(config, bundle, ff):
    changes = rigging.seeded_changes(ff, count=3, seed=config.seed)
    worst: dict = {}
    u0 = np.asarray(ff.patch.interior_point())
    for change in changes:
        for k, v in rigging.identity_residuals(change, u0).items():
            worst[k] = max(worst.get(k, 0.0), v)
    return [_check(k, worst[k], 1e-5) for k in sorted(worst)]


def _suite_umbilic(config, bundle, ff):
    u0 = np.asarray(ff.patch.interior_point())
    res = ff.structure_residuals(u0)
    scale = max(1.0, ff.patch_scale())
    if res["geodesic"] <= 1e-8 * scale:
        # NOT_UMBILIC in the trivial direction: B vanishes identically,
        # the evolution equations hold as 0 = 0, nothing to integrate
        row = _check("umbilic_ode", 0.0, 1e-5,
                     note="NOT_UMBILIC: B = 0 (totally geodesic), suite skipped")
        row["status"] = "SKIPPED"
        return [row]
    try:
        rows = []
        for i, u in enumerate([u0] + ff.sample_points(2)[:2]):
            r1, r2 = analysis.umbilic_ode_residual(ff, u)
            rows.append(_check(f"umbilic_radial[{i}]", r1, 1e-5))
            rows.append(_check(f"umbilic_screen[{i}]", r2, 1e-5))
        return rows
    except analysis.NotUmbilicError as exc:
        raise ConfigError(f"umbilic suite not applicable: {exc}")


def _suite_monge_oracle(config, bundle, ff):
    if bundle.monge is None:
        raise ConfigError("monge-oracle suite needs a graph surface (monge:...)")
    ms = bundle.monge
    tol = 1e-6
    worst = {"B": 0.0, "shape": 0.0, "tau": 0.0, "theta_out": 0.0,
             "theta_in": 0.0, "xi": 0.0, "N": 0.0, "theta_sum": 0.0}
    never_ts = True
    for u in ms.grid_points():
        oracle = ms.closed_shape(u)
        sp = ff.shape(u)
        worst["B"] = max(worst["B"], float(np.max(np.abs(sp.B_param - oracle["B_param"]))))
        worst["shape"] = max(worst["shape"], float(np.max(np.abs(sp.A_xi_param - oracle["shape_param"]))))
        worst["tau"] = max(worst["tau"], float(np.max(np.abs(sp.tau_param))))
        worst["theta_out"] = max(worst["theta_out"], abs(sp.theta_out - oracle["theta_out"]))
        worst["theta_in"] = max(worst["theta_in"], abs(sp.theta_in - oracle["theta_in"]))
        worst["xi"] = max(worst["xi"], float(np.max(np.abs(sp.frame.xi_amb - oracle["xi_amb"]))))
        worst["N"] = max(worst["N"], float(np.max(np.abs(sp.frame.N_amb - oracle["N_amb"]))))
        worst["theta_sum"] = max(worst["theta_sum"], abs(sp.theta_out + sp.theta_in))
        never_ts &= not ff.classify(u).is_ts
    rows = [_check(f"oracle_{k}", worst[k], tol) for k in sorted(worst)]
    rows.append(_check("never_trapped", 0.0 if never_ts else 1.0, 0.5))
    return rows


def _suite_variation(config, bundle, ff):
    if not ff.patch.leaf_axis_indices():
        raise ConfigError("variation suite needs a surface with closed leaves")
    leaf = analysis.LeafPatch(ff, np.asarray(ff.patch.interior_point()))
    drag = analysis.lie_drag(leaf, [0.01, -0.01, 0.005, -0.005])
    av = analysis.area_variation(drag)
    rows = [_check("area_variation_gap", av["rel_gap"], 1e-2),
            _check("variation_integrand", 0.0, 1.0,
                   note=av["variation_integrand"])]
    return rows


_SUITE_FNS = {
    "raychaudhuri": _suite_raychaudhuri,
    "codazzi": _suite_codazzi,
    "rigging": _suite_rigging,
    "umbilic": _suite_umbilic,
    "monge-oracle": _suite_monge_oracle,
    "variation": _suite_variation,
}


def run_verify(config: RunConfig) -> tuple:
    if config.suite is None:
        raise ConfigError("verify needs --suite")
    bundle, ff = build_field(config)
    with _step_overrides(config):
        rows = _SUITE_FNS[config.suite](config, bundle, ff)
    failed = [r for r in rows if r["status"] == "FAIL"]
    aggregates = {
        "suite": config.suite,
        "checks": len(rows),
        "failed": len(failed),
        "max_value": max((abs(r["value"]) for r in rows), default=0.0),
    }
    report = Report(command="verify", config=config.echo(),
                    aggregates=aggregates, checks=rows)
    return report, (1 if failed else 0)


# ---- drag -------------------------------------------------------------------------


def run_drag(config: RunConfig) -> tuple:
    bundle, ff = build_field(config)
    eps = tuple(sorted(set(config.epsilons)))
    if not ff.patch.leaf_axis_indices():
        # nothing compact to measure: emit the documented layout, mark the
        # data columns skipped
        rows = [{"epsilon": float(e), "area": "skipped",
                 "theta_out": "skipped", "theta_in": "skipped"} for e in eps]
        aggregates = {"leaf": None, "note": "no closed leaves; measures skipped"}
        report = Report(command="drag", config=config.echo(),
                        aggregates=aggregates, rows=rows)
        return report, 0
    with _step_overrides(config):
        leaf = analysis.LeafPatch(ff, np.asarray(ff.patch.interior_point()))
        drag = analysis.lie_drag(leaf, eps)
        rows = [{"epsilon": float(s.epsilon), "area": float(s.area),
                 "theta_out": float(np.mean(s.theta_out)),
                 "theta_in": float(np.mean(s.theta_in))}
                for s in drag.sections]
        aggregates = {"leaf": list(leaf.label()), "points": int(len(leaf.nodes))}
        try:
            delta, _ = analysis.expansion_variation(drag)
            aggregates["delta_theta_out"] = float(delta)
        except (KeyError, ValueError):
            pass
        try:
            aggregates["area_variation"] = _plain(analysis.area_variation(drag))
        except (KeyError, ValueError):
            pass
    report = Report(command="drag", config=config.echo(),
                    aggregates=aggregates, rows=rows)
    return report, 0


# ---- catalog ----------------------------------------------------------------------


def run_catalog(fmt: str, path: Optional[str]) -> tuple:
    surfaces = {}
    for name in sorted(catalogs.surface_catalog()):
        if name == "monge":
            surfaces[name] = {"ambient": "minkowski:<k+1>",
                              "axes": ["u1..uk"],
                              "expected": {}}
            continue
        b = catalogs.surface(name)
        surfaces[name] = {
            "ambient": b.ambient.name,
            "axes": [f"{ax.name}[{ax.lo:g},{ax.hi:g}]:{ax.n}"
                     + ("p" if ax.periodic else "") + ("L" if ax.leaf else "")
                     for ax in b.patch.axes],
            "expected": {k: _plain(v) for k, v in
                         sorted(b.notes.get("expected", {}).items())},
        }
    metrics = sorted(spacetime.metric_catalog())
    report = Report(command="catalog", config={},
                    aggregates={"surfaces": len(surfaces), "metrics": len(metrics)})
    report.verdict = None
    doc = report.as_dict()
    doc["surfaces"] = surfaces
    doc["metrics"] = metrics
    text = _render(_plain(doc)) + "\n"
    if fmt == "csv":
        lines = [f"# schema: {SCHEMA} catalog", "name,ambient,axes"]
        for name, rec in surfaces.items():
            lines.append(f"{name},{rec['ambient']},\"{';'.join(rec['axes'])}\"")
        text = "\n".join(lines) + "\n"
    if path:
        try:
            with open(path, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write report to {path!r}: {exc}")
    else:
        sys.stdout.write(text)
    return None, 0


# ---- argument plumbing --------------------------------------------------------------


def _add_common(p):
    p.add_argument("--surface", help="catalog id, name:k=v,... or monge:<expr>")
    p.add_argument("--metric", help="metric id (name:k=v) or definition file")
    p.add_argument("--grid", help="per-axis counts, e.g. t=8,theta=16,phi=16")
    p.add_argument("--tol-null", type=float, dest="tol_null")
    p.add_argument("--tol-classify", type=float, dest="tol_classify")
    p.add_argument("--curvature-tol", type=float, dest="tol_curvature")
    p.add_argument("--step-exact", type=float, dest="step_exact")
    p.add_argument("--step-noisy", type=float, dest="step_noisy")
    p.add_argument("--seed", type=int)
    p.add_argument("--output", "-o", help="report path (default stdout)")
    p.add_argument("--format", dest="fmt", choices=("json", "csv"))
    p.add_argument("--config", help="JSON file with defaults for any flag")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nullrig",
        description="rigged null hypersurface analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    pa = sub.add_parser("analyze", help="full pipeline over a surface grid")
    _add_common(pa)
    pv = sub.add_parser("verify", help="run a residual suite")
    _add_common(pv)
    pv.add_argument("--suite", choices=SUITES)
    pd = sub.add_parser("drag", help="flow a leaf and emit the variation CSV")
    _add_common(pd)
    pd.add_argument("--epsilons", help="comma list, e.g. 0.01,-0.01,0.005,-0.005")
    pc = sub.add_parser("catalog", help="list built-in surfaces and metrics")
    pc.add_argument("--output", "-o")
    pc.add_argument("--format", dest="fmt", choices=("json", "csv"))
    return parser


_CONFIG_KEYS = ("surface", "metric", "grid", "tol_null", "tol_classify",
                "tol_curvature", "step_exact", "step_noisy", "seed",
                "epsilons", "suite", "output", "fmt")


def _config_from_args(args, default_fmt: str = "json") -> RunConfig:
    file_vals = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_vals = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {args.config!r}: {exc}")
        unknown = set(file_vals) - set(_CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
    merged = {"fmt": default_fmt}
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
        elif key in file_vals:
            merged[key] = file_vals[key]
    if isinstance(merged.get("grid"), str):
        merged["grid"] = parse_grid(merged["grid"])
    if isinstance(merged.get("epsilons"), str):
        merged["epsilons"] = parse_epsilons(merged["epsilons"])
    if isinstance(merged.get("epsilons"), list):
        merged["epsilons"] = tuple(float(v) for v in merged["epsilons"])
    if "surface" not in merged:
        raise ConfigError("a --surface is required")
    return RunConfig(**merged).validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "catalog":
            _, code = run_catalog(args.fmt or "json", args.output)
            return code
        config = _config_from_args(
            args, default_fmt="csv" if args.command == "drag" else "json")
        if args.command == "verify" and config.suite is None:
            raise ConfigError("verify needs --suite")
        runner = {"analyze": run_analyze, "verify": run_verify,
                  "drag": run_drag}[args.command]
        report, code = runner(config)
    except ConfigError as exc:
        print(f"nullrig: error: {exc}", file=sys.stderr)
        return 2
    except GeometryError as exc:
        print(f"nullrig: invariant failure: {exc}", file=sys.stderr)
        return 1
    text = report_emit(report, config.fmt, config.output)
    if config.output:
        summary = {"written": config.output, "exit": code}
        if report.verdict is not None:
            summary["labels"] = report.verdict.get("labels")
        print(" ".join(f"{k}={v}" for k, v in summary.items()))
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
