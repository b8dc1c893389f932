"""Null graphs over Minkowski space: x^0 = F(x^1, ..., x^{n+1}).

The graph of F is null exactly when |grad F| = 1 everywhere.  In that
case everything has a closed form in terms of F alone:

    xi  = (1, grad F) / sqrt(2)         (tangent null generator)
    N   = (-1, grad F) / sqrt(2)        (null rigging, <N, xi> = 1)
    tau = 0,  and both shape operators equal -Hess(F)/sqrt(2)

acting on the graph parameters (differentiating |grad F|^2 = 1 gives
Hess(F) grad F = 0, so the Hessian already annihilates the radical).
The two null expansions are theta_out = -lap F / sqrt(2) and
theta_in = +lap F / sqrt(2): the graph is a trapping horizon precisely
when F is harmonic.

Leaves are level sets of F, recovered on a grid by binning values of F
to a relative width of 1e-9 of the sampled range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import exprlang, jets
from .hypersurface import (
    AmbientRigging,
    Axis,
    HypersurfacePatch,
    NotNullError,
    classify_point,
)
from .spacetime import minkowski

__all__ = ["MongeSurface", "MongeLeaf", "MongeReport", "monge_surface"]

SQRT2 = math.sqrt(2.0)


@dataclass
class MongeSurface:
    name: str
    F: exprlang.CompiledExpr
    axes: tuple[Axis, ...]

    @property
    def nspace(self) -> int:
        return len(self.axes)

    @property
    def dim(self) -> int:
        return self.nspace + 1

    @property
    def chart(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes)

    # -- local data ----------------------------------------------------------

    def F_jet(self, u: Sequence[float]) -> jets.Jet2:
        return jets.lift_and_evaluate(lambda *s: self.F(*s), u)

    def null_defect(self, u) -> float:
        j = self.F_jet(u)
        return abs(float(j.grad @ j.grad) - 1.0)

    def gradient_identity_defect(self, u) -> float:
        """max_b |sum_a F_a F_ab|: the differentiated null constraint."""
        j = self.F_jet(u)
        return float(np.max(np.abs(j.hess @ j.grad)))

    def laplacian(self, u) -> float:
        return float(np.trace(self.F_jet(u).hess))

    def closed_shape(self, u) -> dict:
        """Closed-form extrinsic data (the independent oracle for the
        frame engine): B and both shape operators as -Hess/sqrt(2)."""
        j = self.F_jet(u)
        A = -j.hess / SQRT2
        lap = float(np.trace(j.hess))
        return {
            "B_param": A,
            "shape_param": A,
            "tau": np.zeros(self.nspace),
            "theta_out": -lap / SQRT2,
            "theta_in": lap / SQRT2,
            "xi_amb": np.concatenate(([1.0], j.grad)) / SQRT2,
            "N_amb": np.concatenate(([-1.0], j.grad)) / SQRT2,
        }

    def verify_null_on_grid(self, tol: float = 1e-8) -> float:
        worst = 0.0
        for u in self.grid_points():
            worst = max(worst, self.null_defect(u))
        if worst > tol:
            raise NotNullError(
                f"{self.name}: |grad F|^2 - 1 reaches {worst:.3e}; "
                "the graph is not a null hypersurface"
            )
        return worst

    def grid_points(self) -> np.ndarray:
        grids = np.meshgrid(*[a.grid() for a in self.axes], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    # -- engine adapters -------------------------------------------------------

    def to_patch(self) -> HypersurfacePatch:
        def lift(i):
            return lambda *args: args[i]

        fns = [lambda *args: self.F(*args)]
        fns += [lift(i) for i in range(self.nspace)]
        sources = (str(self.F),) + self.chart
        return HypersurfacePatch(
            name=self.name,
            ambient=minkowski(self.dim),
            axes=self.axes,
            psi_fns=tuple(fns),
            psi_sources=sources,
            notes={"kind": "monge", "F": str(self.F)},
        )

    def rigging(self) -> AmbientRigging:
        """N_F = (-1, grad F)/sqrt(2) as an ambient field (the spatial
        point determines grad F, so this extends off the surface)."""

        def fn(X: np.ndarray) -> np.ndarray:
            X = np.asarray(X, dtype=float)
            flat = X.reshape(-1, self.dim)
            out = np.empty_like(flat)
            for k, row in enumerate(flat):
                j = self.F_jet(row[1:])
                out[k, 0] = -1.0
                out[k, 1:] = j.grad
            return out.reshape(X.shape) / SQRT2

        return AmbientRigging(fn, name=f"N[{self.name}]")

    def xi_field(self) -> AmbientRigging:
        def fn(X: np.ndarray) -> np.ndarray:
            X = np.asarray(X, dtype=float)
            flat = X.reshape(-1, self.dim)
            out = np.empty_like(flat)
            for k, row in enumerate(flat):
                j = self.F_jet(row[1:])
                out[k, 0] = 1.0
                out[k, 1:] = j.grad
            return out.reshape(X.shape) / SQRT2

        return AmbientRigging(fn, name=f"xi[{self.name}]")

    # -- leaves and horizon test ------------------------------------------------

    def leaf_bins(self, rel_width: float = 1e-9) -> list["MongeLeaf"]:
        pts = self.grid_points()
        vals = np.array([float(self.F(*u)) for u in pts])
        spread = float(vals.max() - vals.min())
        width = rel_width * max(1.0, spread)
        order = np.argsort(vals, kind="stable")
        leaves: list[MongeLeaf] = []
        start = 0
        sorted_vals = vals[order]
        for k in range(1, len(order) + 1):
            if k == len(order) or sorted_vals[k] - sorted_vals[start] > width:
                idx = order[start:k]
                leaves.append(
                    MongeLeaf(
                        level=float(np.mean(vals[idx])),
                        point_indices=np.sort(idx),
                        points=pts[np.sort(idx)],
                    )
                )
                start = k
        return leaves

    def horizon_report(self, band: float | None = None) -> "MongeReport":
        pts = self.grid_points()
        null_defect = 0.0
        max_lap = 0.0
        scale = 0.0
        laps = np.empty(len(pts))
        for k, u in enumerate(pts):
            j = self.F_jet(u)
            null_defect = max(null_defect, abs(float(j.grad @ j.grad) - 1.0))
            lap = float(np.trace(j.hess))
            laps[k] = lap
            max_lap = max(max_lap, abs(lap))
            scale = max(scale, float(np.max(np.abs(j.hess))) / SQRT2)
        if band is None:
            band = 1e-7 * max(1.0, scale)
        leaves = self.leaf_bins()
        leaf_rows = []
        for leaf in leaves:
            lv = laps[leaf.point_indices]
            labels = {}
            for lap in lv:
                c = classify_point(-lap / SQRT2, lap / SQRT2, band)
                labels[c.label] = labels.get(c.label, 0) + 1
            leaf_rows.append(
                (leaf, float(np.max(np.abs(lv))) / SQRT2, dict(sorted(labels.items())))
            )
        return MongeReport(
            surface=self.name,
            band=band,
            null_defect=null_defect,
            max_abs_laplacian=max_lap,
            is_trapping_horizon=(max_lap / SQRT2 <= band),
            leaves=leaf_rows,
        )


@dataclass(frozen=True)
class MongeLeaf:
    level: float
    point_indices: np.ndarray
    points: np.ndarray

    @property
    def npoints(self) -> int:
        return len(self.point_indices)


@dataclass(frozen=True)
class MongeReport:
    surface: str
    band: float
    null_defect: float
    max_abs_laplacian: float
    is_trapping_horizon: bool
    leaves: list

    def worst_expansion(self) -> float:
        return self.max_abs_laplacian / SQRT2


def monge_surface(expr: str, axes: Sequence[Axis] | None = None,
                  name: str | None = None) -> MongeSurface:
    """Build a Monge surface from an expression in u1..u{k}.

    Without an explicit box, variables are inferred from the expression
    (contiguous u1..uk plus any trailing unused directions are NOT added;
    pass axes to control dimension) and each gets the box [0.6, 1.4]
    with 5 grid points.
    """
    if axes is None:
        probe_chart = tuple(f"u{i}" for i in range(1, 17))
        e = exprlang.parse(expr, probe_chart)
        used = e.variables()
        k = 0
        for i, nm in enumerate(probe_chart, start=1):
            if nm in used:
                k = i
        k = max(k, 2)
        axes = tuple(Axis(f"u{i}", 0.6, 1.4, 5) for i in range(1, k + 1))
    else:
        axes = tuple(axes)
    chart = tuple(a.name for a in axes)
    F = exprlang.parse(expr, chart)
    return MongeSurface(name=name or f"monge:{expr}", F=F, axes=axes)
