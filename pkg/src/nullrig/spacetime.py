"""Ambient Lorentzian metrics: evaluation, Christoffel symbols, curvature.

A MetricSpec holds the metric components as parsed expressions over a
named chart.  Components and their first derivatives are evaluated
exactly through jets; Christoffel symbols come either from a hand-coded
closed form (catalog metrics) or from the generic jet-based formula.
Curvature is one finite difference of the Christoffel field away, with a
Richardson level on top, which keeps Ricci residuals of the flat and
vacuum catalog metrics comfortably below 1e-8.

Index conventions, used everywhere downstream:

    R(e_C, e_D) e_B = riemann_up[A, B, C, D] e_A
    riemann_low[A, B, C, D] = g_AE riemann_up[E, B, C, D]
    ricci[B, D] = sum_A riemann_up[A, B, A, D]      (trace on slots 1, 3)

so ricci(U, V) is the trace of W -> R(W, U) V.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import linalg as sla

from . import exprlang, jets, numerics

__all__ = [
    "MetricSpec",
    "CurvatureSample",
    "SingularMetricError",
    "MetricFileError",
    "minkowski",
    "schwarzschild_ef",
    "warped_product_6d",
    "metric_catalog",
    "load_metric",
    "loads_metric",
    "save_metric",
    "dumps_metric",
]

COND_LIMIT = 1e12


class SingularMetricError(ArithmeticError):
    """Metric not invertible at the requested point (cond > 1e12)."""


class MetricFileError(Exception):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass
class MetricSpec:
    """A Lorentzian metric on a coordinate chart.

    comps maps (a, b) with a <= b to parsed component expressions;
    missing entries are identically zero.  time_sign orients the chart:
    a vector V is future when time_sign * <V, d_0> < 0, with chart
    fallbacks for the null cases (see time_orientation).
    """

    name: str
    chart: tuple[str, ...]
    comps: dict[tuple[int, int], exprlang.CompiledExpr]
    constant_curvature: float | None = None
    time_sign: int = 1
    infall: tuple[int, int] | None = None  # (axis, sign): sign*v[axis] > 0 is future
    christoffel_fn: Callable | None = field(default=None, repr=False)
    christoffel_batch_fn: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        for (a, b) in self.comps:
            if not (0 <= a <= b < self.dim):
                raise ValueError(f"component index ({a},{b}) outside chart")

    @property
    def dim(self) -> int:
        return len(self.chart)

    # ---- evaluation --------------------------------------------------------

    def metric(self, x: Sequence[float]) -> np.ndarray:
        d = self.dim
        env = dict(zip(self.chart, np.asarray(x, dtype=float)))
        g = np.zeros((d, d))
        for (a, b), expr in self.comps.items():
            v = float(expr.evaluate(env))
            g[a, b] = v
            g[b, a] = v
        return g

    def metric_batch(self, X: np.ndarray) -> np.ndarray:
        """Metric at a batch of points X (..., dim) -> (..., dim, dim)."""
        X = np.asarray(X, dtype=float)
        d = self.dim
        env = {name: X[..., i] for i, name in enumerate(self.chart)}
        g = np.zeros(X.shape[:-1] + (d, d))
        for (a, b), expr in self.comps.items():
            v = expr.evaluate(env)
            g[..., a, b] = v
            g[..., b, a] = v
        return g

    def metric_jets(self, x: Sequence[float]):
        """(g, dg) with dg[c, a, b] = d_c g_ab, exact via jets."""
        d = self.dim
        env = dict(zip(self.chart, jets.seed(x)))
        g = np.zeros((d, d))
        dg = np.zeros((d, d, d))
        for (a, b), expr in self.comps.items():
            j = expr.evaluate(env)
            if isinstance(j, jets.Jet2):
                v, grad = j.value, j.grad
            else:
                v, grad = float(j), np.zeros(d)
            g[a, b] = g[b, a] = v
            dg[:, a, b] = grad
            dg[:, b, a] = grad
        return g, dg

    def inverse_metric(self, x: Sequence[float]) -> np.ndarray:
        g = self.metric(x)
        if np.linalg.cond(g) > COND_LIMIT:
            raise SingularMetricError(
                f"{self.name}: metric singular at {np.asarray(x).tolist()}"
            )
        return np.linalg.inv(g)

    def inner(self, x, v, w) -> float:
        return float(np.asarray(v) @ self.metric(x) @ np.asarray(w))

    # ---- connection ----------------------------------------------------------

    def christoffel(self, x: Sequence[float]) -> np.ndarray:
        """Gamma[a, b, c] = Gamma^a_{bc}."""
        if self.christoffel_fn is not None:
            return self.christoffel_fn(np.asarray(x, dtype=float))
        return self.christoffel_generic(x)

    def christoffel_generic(self, x: Sequence[float]) -> np.ndarray:
        d = self.dim
        g, dg = self.metric_jets(x)
        if np.linalg.cond(g) > COND_LIMIT:
            raise SingularMetricError(
                f"{self.name}: metric singular at {np.asarray(x).tolist()}"
            )
        # lower[e, b, c] = Gamma_{e,bc}; dg[c, a, b] = d_c g_ab
        lower = 0.5 * (
            np.einsum("bec->ebc", dg)  # d_b g_ec
            + np.einsum("ceb->ebc", dg)  # d_c g_eb
            - dg  # d_e g_bc
        )
        return sla.solve(g, lower.reshape(d, d * d), assume_a="sym").reshape(d, d, d)

    def christoffel_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.christoffel_batch_fn is not None:
            return self.christoffel_batch_fn(X)
        flat = X.reshape(-1, self.dim)
        out = np.stack([self.christoffel(p) for p in flat])
        return out.reshape(X.shape[:-1] + (self.dim,) * 3)

    # ---- curvature -----------------------------------------------------------

    def curvature(self, x: Sequence[float]) -> "CurvatureSample":
        x = np.asarray(x, dtype=float)
        d = self.dim
        dGamma = np.zeros((d, d, d, d))  # dGamma[c] = d_c Gamma
        for c in range(d):
            h = numerics.step_exact(x[c])
            dGamma[c] = numerics.central_diff_richardson(self.christoffel, x, c, h)
        G = self.christoffel(x)
        # R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}
        R = (
            np.einsum("cadb->abcd", dGamma)
            - np.einsum("dacb->abcd", dGamma)
            + np.einsum("ace,edb->abcd", G, G)
            - np.einsum("ade,ecb->abcd", G, G)
        )
        g = self.metric(x)
        Rlow = np.einsum("ae,ebcd->abcd", g, R)
        ricci = np.einsum("abad->bd", R)
        checks = {
            "antisym_last_pair": float(
                np.max(np.abs(R + np.transpose(R, (0, 1, 3, 2))))
            ),
            "antisym_first_pair": float(
                np.max(np.abs(Rlow + np.transpose(Rlow, (1, 0, 2, 3))))
            ),
            "first_bianchi": float(
                np.max(
                    np.abs(
                        R
                        + np.transpose(R, (0, 2, 3, 1))
                        + np.transpose(R, (0, 3, 1, 2))
                    )
                )
            ),
            "pair_symmetry": float(
                np.max(np.abs(Rlow - np.transpose(Rlow, (2, 3, 0, 1))))
            ),
        }
        return CurvatureSample(x=x, g=g, gamma=G, riemann_up=R, riemann_low=Rlow,
                               ricci=ricci, checks=checks)

    def space_form_residual(self, x, c: float | None = None) -> float:
        """Max deviation of the Riemann tensor from constant curvature c."""
        if c is None:
            c = self.constant_curvature if self.constant_curvature is not None else 0.0
        s = self.curvature(x)
        g = s.g
        model = c * (np.einsum("ac,bd->abcd", g, g) - np.einsum("ad,bc->abcd", g, g))
        return float(np.max(np.abs(s.riemann_low - model)))

    def ncc_probe(self, x, v, tol: float = 1e-10):
        """Ricci(v, v) and whether it is >= -tol (null convergence check)."""
        s = self.curvature(x)
        val = float(np.asarray(v) @ s.ricci @ np.asarray(v))
        return val, val >= -tol

    # ---- orientation -----------------------------------------------------------

    def time_orientation(self, x, v) -> int:
        """+1 future, -1 past, 0 indeterminate (zero vector).

        Primary rule: sign of -time_sign * <v, d_0>.  When <v, d_0> ~ 0
        (v is tangent to the d_0 null cone, e.g. horizon generators in
        horizon-adapted charts) fall back to the infall axis rule, then
        to the sign of the d_0 component.
        """
        v = np.asarray(v, dtype=float)
        gv = self.metric(x) @ v
        scale = float(np.max(np.abs(gv))) + float(np.max(np.abs(v)))
        if scale == 0.0:
            return 0
        tol = 1e-9 * scale
        s = self.time_sign * gv[0]
        if s < -tol:
            return 1
        if s > tol:
            return -1
        if self.infall is not None:
            axis, sign = self.infall
            w = sign * v[axis]
            if w > tol:
                return 1
            if w < -tol:
                return -1
        w = self.time_sign * v[0]
        if w > tol:
            return 1
        if w < -tol:
            return -1
        return 0

    def signature_counts(self, x) -> tuple[int, int]:
        """(negative, positive) eigenvalue counts of g at x."""
        ev = np.linalg.eigvalsh(self.metric(x))
        return int(np.sum(ev < 0)), int(np.sum(ev > 0))


@dataclass(frozen=True)
class CurvatureSample:
    x: np.ndarray
    g: np.ndarray
    gamma: np.ndarray
    riemann_up: np.ndarray
    riemann_low: np.ndarray
    ricci: np.ndarray
    checks: dict[str, float]

    def sectional(self, u, v) -> float:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        num = float(np.einsum("abcd,a,b,c,d->", self.riemann_low, u, v, u, v))
        uu = float(u @ self.g @ u)
        vv = float(v @ self.g @ v)
        uv = float(u @ self.g @ v)
        den = uu * vv - uv * uv
        if abs(den) < 1e-14:
            raise ZeroDivisionError("degenerate plane for sectional curvature")
        return num / den


# ---- catalog ----------------------------------------------------------------


def _parse_comps(chart, entries: Mapping[tuple[int, int], str]):
    return {
        (a, b): exprlang.parse(src, chart)
        for (a, b), src in entries.items()
    }


def minkowski(dim: int = 4) -> MetricSpec:
    if dim < 2:
        raise ValueError("need at least 2 dimensions")
    chart = tuple(f"x{i}" for i in range(dim))
    entries = {(0, 0): "-1"}
    for i in range(1, dim):
        entries[(i, i)] = "1"
    zero = lambda x: np.zeros((dim, dim, dim))
    zero_batch = lambda X: np.zeros(X.shape[:-1] + (dim,) * 3)
    return MetricSpec(
        name=f"minkowski:{dim}",
        chart=chart,
        comps=_parse_comps(chart, entries),
        constant_curvature=0.0,
        christoffel_fn=zero,
        christoffel_batch_fn=zero_batch,
    )


def schwarzschild_ef(m: float = 1.0) -> MetricSpec:
    """Schwarzschild in ingoing null coordinates (t, r, theta, phi).

    ds^2 = -(1-2m/r) dt^2 + (4m/r) dt dr + (1+2m/r) dr^2 + r^2 dOmega^2.
    The chart is horizon-regular; ingoing radial null rays run along
    t + r = const, so decreasing r is the future fallback orientation.
    """
    if m <= 0:
        raise ValueError("mass must be positive")
    chart = ("t", "r", "theta", "phi")
    two_m = repr(2.0 * m)
    entries = {
        (0, 0): f"-(1 - {two_m}/r)",
        (0, 1): f"{two_m}/r",
        (1, 1): f"1 + {two_m}/r",
        (2, 2): "r^2",
        (3, 3): "r^2*sin(theta)^2",
    }

    def gamma_batch(X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        r = X[..., 1]
        th = X[..., 2]
        sin = np.sin(th)
        cos = np.cos(th)
        r3 = r ** 3
        G = np.zeros(X.shape[:-1] + (4, 4, 4))
        G[..., 0, 0, 0] = 2 * m * m / r3
        G[..., 0, 0, 1] = G[..., 0, 1, 0] = m * (2 * m + r) / r3
        G[..., 0, 1, 1] = 2 * m * (m + r) / r3
        G[..., 0, 2, 2] = -2 * m
        G[..., 0, 3, 3] = -2 * m * sin ** 2
        G[..., 1, 0, 0] = m * (r - 2 * m) / r3
        G[..., 1, 0, 1] = G[..., 1, 1, 0] = -2 * m * m / r3
        G[..., 1, 1, 1] = -m * (2 * m + r) / r3
        G[..., 1, 2, 2] = 2 * m - r
        G[..., 1, 3, 3] = (2 * m - r) * sin ** 2
        inv_r = 1.0 / r
        G[..., 2, 1, 2] = G[..., 2, 2, 1] = inv_r
        G[..., 2, 3, 3] = -sin * cos
        G[..., 3, 1, 3] = G[..., 3, 3, 1] = inv_r
        with np.errstate(divide="ignore", invalid="ignore"):
            cot = np.where(sin != 0.0, cos / np.where(sin != 0.0, sin, 1.0), np.inf)
        G[..., 3, 2, 3] = G[..., 3, 3, 2] = cot
        return G

    return MetricSpec(
        name=f"schwarzschild_ef:m={m!r}",
        chart=chart,
        comps=_parse_comps(chart, entries),
        time_sign=1,
        infall=(1, -1),
        christoffel_fn=lambda x: gamma_batch(x),
        christoffel_batch_fn=gamma_batch,
    )


def warped_product_6d() -> MetricSpec:
    """-dx0^2 + dx1^2 + e^{2 x0}(dx2^2 + dx3^2) + e^{2 x1}(dx4^2 + dx5^2).

    time_sign is -1: the orientation is chosen so the catalog rigging of
    the x0 = -x1 null plane is future-directed.
    """
    chart = tuple(f"x{i}" for i in range(6))
    entries = {
        (0, 0): "-1",
        (1, 1): "1",
        (2, 2): "exp(2*x0)",
        (3, 3): "exp(2*x0)",
        (4, 4): "exp(2*x1)",
        (5, 5): "exp(2*x1)",
    }

    def gamma_batch(X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        e0 = np.exp(2.0 * X[..., 0])
        e1 = np.exp(2.0 * X[..., 1])
        G = np.zeros(X.shape[:-1] + (6, 6, 6))
        G[..., 0, 2, 2] = e0
        G[..., 0, 3, 3] = e0
        G[..., 1, 4, 4] = -e1
        G[..., 1, 5, 5] = -e1
        for a, b in ((2, 0), (3, 0), (4, 1), (5, 1)):
            G[..., a, a, b] = 1.0
            G[..., a, b, a] = 1.0
        return G

    return MetricSpec(
        name="warped_product_6d",
        chart=chart,
        comps=_parse_comps(chart, entries),
        time_sign=-1,
        christoffel_fn=lambda x: gamma_batch(x),
        christoffel_batch_fn=gamma_batch,
    )


def metric_catalog() -> dict[str, Callable]:
    return {
        "minkowski": minkowski,
        "schwarzschild_ef": schwarzschild_ef,
        "warped_product_6d": warped_product_6d,
    }


# ---- metric definition files -------------------------------------------------
#
# Line-oriented text format:
#
#     # comment
#     name: my_metric
#     dim: 4
#     chart: t r theta phi
#     constant_curvature: none
#     time_sign: 1
#     g[0,0]: -(1 - 2.0/r)
#     g[2,2]: r^2
#
# Missing g entries are zero; expressions use the chart variables.

_KEY_RE = re.compile(r"^([A-Za-z_]+)(\[(\d+)\s*,\s*(\d+)\])?\s*:\s*(.*)$")


def loads_metric(text: str) -> MetricSpec:
    name = "metric"
    dim = None
    chart: tuple[str, ...] | None = None
    cc: float | None = None
    time_sign = 1
    infall = None
    raw_comps: dict[tuple[int, int], tuple[str, int]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        mm = _KEY_RE.match(line)
        if mm is None:
            raise MetricFileError(f"expected 'key: value', got {line!r}", lineno)
        key, _, ia, ib, value = mm.groups()
        value = value.strip()
        if key == "name":
            name = value
        elif key == "dim":
            dim = int(value)
        elif key == "chart":
            chart = tuple(value.split())
        elif key == "constant_curvature":
            cc = None if value.lower() == "none" else float(value)
        elif key == "time_sign":
            time_sign = int(value)
            if time_sign not in (1, -1):
                raise MetricFileError("time_sign must be 1 or -1", lineno)
        elif key == "infall":
            axis, sign = value.split()
            infall = (int(axis), int(sign))
        elif key == "g":
            if ia is None:
                raise MetricFileError("metric entries need indices g[a,b]", lineno)
            raw_comps[(int(ia), int(ib))] = (value, lineno)
        else:
            raise MetricFileError(f"unknown key {key!r}", lineno)

    if chart is None:
        raise MetricFileError("missing 'chart' entry", 0)
    if dim is not None and dim != len(chart):
        raise MetricFileError("dim does not match chart length", 0)
    comps = {}
    for (a, b), (src, lineno) in raw_comps.items():
        if not (0 <= a < len(chart) and 0 <= b < len(chart)):
            raise MetricFileError(f"index ({a},{b}) outside chart", lineno)
        try:
            comps[(min(a, b), max(a, b))] = exprlang.parse(src, chart)
        except exprlang.ParseError as err:
            raise MetricFileError(str(err), lineno) from err
    if not comps:
        raise MetricFileError("no metric components given", 0)
    return MetricSpec(
        name=name,
        chart=chart,
        comps=comps,
        constant_curvature=cc,
        time_sign=time_sign,
        infall=infall,
    )


def load_metric(path) -> MetricSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_metric(fh.read())


def dumps_metric(spec: MetricSpec) -> str:
    lines = [
        f"name: {spec.name}",
        f"dim: {spec.dim}",
        "chart: " + " ".join(spec.chart),
        "constant_curvature: "
        + ("none" if spec.constant_curvature is None else repr(spec.constant_curvature)),
        f"time_sign: {spec.time_sign}",
    ]
    if spec.infall is not None:
        lines.append(f"infall: {spec.infall[0]} {spec.infall[1]}")
    for (a, b) in sorted(spec.comps):
        lines.append(f"g[{a},{b}]: {exprlang.pretty(spec.comps[(a, b)])}")
    return "\n".join(lines) + "\n"


def save_metric(spec: MetricSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_metric(spec))
