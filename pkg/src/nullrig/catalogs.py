"""Named surface bundles: patch + rigging + reference notes.

Each entry packages an embedded null patch with its catalog rigging and
the closed-form values the test-suite freezes.  Bundles are built by
keyword (`surface("schwarzschild_horizon:m=1.0")`), with grid overrides
applied downstream.
"""

from __future__ import annotations

import inspect
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .hypersurface import AmbientRigging, Axis, HypersurfacePatch, Rigging, patch_from_exprs
from .monge import MongeSurface, monge_surface
from .spacetime import MetricSpec, minkowski, schwarzschild_ef, warped_product_6d

__all__ = ["SurfaceBundle", "surface", "surface_catalog", "parse_surface_spec"]

PI = math.pi


@dataclass
class SurfaceBundle:
    name: str
    patch: HypersurfacePatch
    rigging: Rigging
    monge: MongeSurface | None = None
    notes: dict = field(default_factory=dict)

    @property
    def ambient(self) -> MetricSpec:
        return self.patch.ambient


# ---- builders ---------------------------------------------------------------


def schwarzschild_horizon(m: float = 1.0, nt: int = 8, ntheta: int = 16,
                          nphi: int = 16, t_lo: float = -1.0, t_hi: float = 1.0) -> SurfaceBundle:
    """The r = 2m horizon cylinder in ingoing null Schwarzschild
    coordinates, rigged by N = (r/2m)(d_t - d_r)."""
    amb = schwarzschild_ef(m)
    axes = (
        Axis("t", t_lo, t_hi, nt),
        Axis("theta", 0.0, PI, ntheta, leaf=True),
        Axis("phi", 0.0, 2.0 * PI, nphi, periodic=True, leaf=True),
    )
    patch = patch_from_exprs(
        f"schwarzschild_horizon:m={m!r}",
        amb,
        axes,
        ("t", repr(2.0 * m), "theta", "phi"),
        notes={"m": m},
    )

    def nfield(X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.zeros_like(X)
        fac = X[..., 1] / (2.0 * m)
        out[..., 0] = fac
        out[..., 1] = -fac
        return out

    notes = {
        "m": m,
        "leaf": "round spheres t=const, r=2m",
        "expected": {
            "star_S1": 0.0,
            "S1": 1.0 / m,
            "tau_of_xi": 1.0 / (4.0 * m),
            "A_N": f"P/(2m) = P/{2.0 * m!r}",
            "A_xi": 0.0,
            "leaf_area": 16.0 * PI * m * m,
            "area_variation_along_N": -16.0 * PI * m,
        },
        "orientation": "N future (ingoing), xi past; theta_out/theta_in are future-side",
    }
    return SurfaceBundle(patch.name, patch, AmbientRigging(nfield, "N=(r/2m)(dt-dr)"),
                         notes=notes)


def warped6d_plane(extent: float = 0.8, n_transverse: int = 5,
                   n_leaf: int = 5) -> SurfaceBundle:
    """The null plane x0 = -x1 in the 6d double warped product, rigged
    by the constant N = -(d0 + d1)/2.  Leaf directions x2..x5 are taken
    on the unit 4-torus (the metric does not depend on them)."""
    amb = warped_product_6d()
    axes = (
        Axis("u1", -extent, extent, n_transverse),
        Axis("u2", 0.0, 1.0, n_leaf, periodic=True, leaf=True),
        Axis("u3", 0.0, 1.0, n_leaf, periodic=True, leaf=True),
        Axis("u4", 0.0, 1.0, n_leaf, periodic=True, leaf=True),
        Axis("u5", 0.0, 1.0, n_leaf, periodic=True, leaf=True),
    )
    patch = patch_from_exprs(
        "warped6d_plane", amb, axes, ("-u1", "u1", "u2", "u3", "u4", "u5")
    )

    def nfield(X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.zeros_like(X)
        out[..., 0] = -0.5
        out[..., 1] = -0.5
        return out

    notes = {
        "leaf": "4-tori u1=const",
        "expected": {
            "star_S1": 0.0,
            "S1": 2.0,
            "tau": 0.0,
            "A_xi_eigenvalues": [-1.0, -1.0, 1.0, 1.0],
            "A_N_on_screen": "P/2",
            "ricci_xi_xi": -4.0,
        },
        "orientation": "time_sign=-1 makes N future, xi past",
    }
    return SurfaceBundle(patch.name, patch, AmbientRigging(nfield, "N=-(d0+d1)/2"),
                         notes=notes)


def nullcone(dim: int = 4, s_lo: float = 1.0, s_hi: float = 2.0, ns: int = 9,
             nangle: int = 17, nazimuth: int = 16) -> SurfaceBundle:
    """The future light cone x0 = |x| in Minkowski space, punctured at
    the vertex, in polar parameters (s, angles); leaves are the round
    (dim-2)-spheres s = const and the umbilic factor is rho = -1/(sqrt2 s)."""
    if dim < 3:
        raise ValueError("nullcone needs ambient dimension >= 3")
    amb = minkowski(dim)
    nang = dim - 2
    if dim == 4:
        names = ["theta", "phi"]
    else:
        names = [f"a{k}" for k in range(1, nang)] + ["phi"]
    axes = [Axis("s", s_lo, s_hi, ns)]
    for nm in names[:-1]:
        axes.append(Axis(nm, 0.0, PI, nangle, leaf=True))
    axes.append(Axis(names[-1], 0.0, 2.0 * PI, nazimuth, periodic=True, leaf=True))

    # hyperspherical embedding: x_k = s * prod_{j<k} sin(a_j) * cos(a_k)
    sources = ["s"]
    prefix = ""
    for nm in names:
        sources.append(f"s*{prefix}cos({nm})")
        prefix += f"sin({nm})*"
    sources.append(f"s*{prefix}".rstrip("*"))
    patch = patch_from_exprs(f"nullcone:dim={dim}", amb, tuple(axes), tuple(sources),
                             notes={"dim": dim})

    def nfield(X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        sp = X[..., 1:]
        r = np.sqrt(np.sum(sp * sp, axis=-1))
        out = np.empty_like(X)
        out[..., 0] = -1.0
        out[..., 1:] = sp / r[..., None]
        return out / math.sqrt(2.0)

    notes = {
        "leaf": "round spheres s=const",
        "expected": {
            "rho": "-1/(sqrt(2) s); |rho| = 1/(sqrt(2) x0)",
            "tau_of_xi": 0.0,
            "leaf_sectional_curvature": "1/s^2",
        },
        "orientation": "xi future along the cone, N past-directed ingoing",
    }
    return SurfaceBundle(patch.name, patch, AmbientRigging(nfield, "N=(-1,x/|x|)/sqrt2"),
                         notes=notes)


def monge_graph(expr: str, axes: tuple[Axis, ...] | None = None,
                name: str | None = None) -> SurfaceBundle:
    ms = monge_surface(expr, axes, name)
    ms.verify_null_on_grid()
    patch = ms.to_patch()
    return SurfaceBundle(ms.name, patch, ms.rigging(), monge=ms,
                         notes={"F": str(ms.F), "kind": "monge graph"})


def monge_plane() -> SurfaceBundle:
    axes = tuple(Axis(f"u{i}", 0.6, 1.4, 5) for i in (1, 2, 3))
    return monge_graph("(u1+u2)/sqrt(2)", axes, name="monge_plane")


def monge_cone() -> SurfaceBundle:
    axes = tuple(Axis(f"u{i}", 0.6, 1.4, 5) for i in (1, 2, 3))
    return monge_graph("sqrt(u1^2 + u2^2 + u3^2)", axes, name="monge_cone")


def monge_cylinder() -> SurfaceBundle:
    axes = (
        Axis("u1", 0.6, 1.4, 5),
        Axis("u2", 0.6, 1.4, 5),
        Axis("u3", -0.5, 0.5, 5),
    )
    return monge_graph("sqrt(u1^2 + u2^2)", axes, name="monge_cylinder")


def null_plane(n_transverse: int = 5, n_leaf: int = 6) -> SurfaceBundle:
    """The plane x0 = (x1 + x2)/sqrt(2) in leaf-adapted parameters:
    v runs along the gradient, (w1, w2) span the planar leaves (taken
    on a unit 2-torus so leaf quadrature is compact)."""
    amb = minkowski(4)
    s_val = 1.0 / math.sqrt(2.0)
    s = repr(s_val)
    axes = (
        Axis("v", -1.0, 1.0, n_transverse),
        Axis("w1", 0.0, 1.0, n_leaf, periodic=True, leaf=True),
        Axis("w2", 0.0, 1.0, n_leaf, periodic=True, leaf=True),
    )
    # x = v*a + w1*b1 + w2*b2 with a = (1,1,0)/sqrt2, b1 = (1,-1,0)/sqrt2, b2 = e3
    patch = patch_from_exprs(
        "null_plane", amb, axes,
        ("v", f"{s}*v + {s}*w1", f"{s}*v - {s}*w1", "w2"),
    )

    def nfield(X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.zeros_like(X)
        out[..., 0] = -1.0
        out[..., 1] = s_val
        out[..., 2] = s_val
        return out / math.sqrt(2.0)

    notes = {
        "leaf": "planar 2-tori v=const",
        "expected": {"B": 0.0, "all_expansions": 0.0},
    }
    return SurfaceBundle("null_plane", patch, AmbientRigging(nfield, "N_F"), notes=notes)


# ---- registry ----------------------------------------------------------------


def surface_catalog() -> dict[str, Callable]:
    return {
        "schwarzschild_horizon": schwarzschild_horizon,
        "warped6d_plane": warped6d_plane,
        "nullcone": nullcone,
        "monge": monge_graph,
        "monge_plane": monge_plane,
        "monge_cone": monge_cone,
        "monge_cylinder": monge_cylinder,
        "null_plane": null_plane,
    }


def parse_surface_spec(spec: str) -> tuple[str, dict]:
    """'name:k=v,k=v' -> (name, kwargs); values parsed as int/float when
    possible.  Bare values fill the factory's parameters in declaration
    order, so 'nullcone:3' means nullcone(dim=3).  For 'monge:...'
    everything after the colon is the F expression."""
    if ":" not in spec:
        return spec, {}
    name, rest = spec.split(":", 1)
    if name == "monge":
        if rest.startswith("F="):
            rest = rest[2:]
        return name, {"expr": rest}
    factory = surface_catalog().get(name)
    positional = list(inspect.signature(factory).parameters) if factory else []
    kwargs: dict = {}
    for item in rest.split(",") if rest else []:
        if "=" in item:
            k, v = item.split("=", 1)
            k = k.strip()
        else:
            k, v = "", item
        v = v.strip()
        try:
            val = int(v)
        except ValueError:
            try:
                val = float(v)
            except ValueError:
                val = v
        if not k:
            free = [p for p in positional if p not in kwargs]
            if not free:
                raise ValueError(f"bad surface argument {item!r} in {spec!r}")
            k = free[0]
        kwargs[k] = val
    return name, kwargs


def surface(spec: str) -> SurfaceBundle:
    name, kwargs = parse_surface_spec(spec)
    cat = surface_catalog()
    if name not in cat:
        raise KeyError(
            f"unknown surface {name!r}; available: {', '.join(sorted(cat))}"
        )
    return cat[name](**kwargs)
