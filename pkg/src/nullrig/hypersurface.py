"""Rigged frames and extrinsic data on null hypersurface patches.

A patch is an embedding psi: U -> M into an ambient Lorentzian manifold,
on a box of parameters with named axes.  At each point the induced metric
J^T g J must be positive semidefinite with a one-dimensional kernel (the
radical); picking a rigging L transverse to the patch produces

    xi  : the radical generator normalized by <L, xi> = 1,
    N   : the unique null transverse field with <N, xi> = 1 and N ~ L
          modulo xi (N = L - 1/2 <L, L> xi),
    E_i : an orthonormal basis of the screen ker eta, eta = <N, .>.

From one embedding Hessian and central differences of the frame fields
(the frame is rebuilt exactly at the stencil points, so the tiny-step
policy of numerics.py applies) we obtain the full extrinsic package:

    B(U, V)   = <dd_U V, xi>          degenerate second fundamental form
    tau(U)    = <dd_U N, xi>          rotation one-form of the rigging
    A_N       = tau (.) N - dd_. N    shape operator of N   (tangent)
    star A_xi = -dd_. xi - tau (.) xi screen shape operator (tangent)
    C(U, PV)  = <dd_U PV, N>          screen second fundamental form

with traces S1 = tr A_N and star S1 = tr star A_xi.  The two future-side
null expansions of a leaf are theta_out = star S1 and theta_in = -S1,
and the trapped-surface classification bands both with a scale-aware
zero tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import linalg as sla

from . import exprlang, jets, numerics
from .spacetime import MetricSpec

__all__ = [
    "GeometryError",
    "NotNullError",
    "DegenerateRankError",
    "TangentRiggingError",
    "Axis",
    "HypersurfacePatch",
    "patch_from_exprs",
    "Rigging",
    "AmbientRigging",
    "ParamRigging",
    "FrameTolerances",
    "FramePoint",
    "ShapePoint",
    "PointClass",
    "FrameField",
    "classify_point",
]


class GeometryError(Exception):
    pass


class NotNullError(GeometryError):
    """The induced metric is not degenerate-positive at the point."""

    def __init__(self, message, eigenvalues=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues


class DegenerateRankError(GeometryError):
    """The induced metric has kernel dimension > 1 (coordinate pole or a
    genuinely degenerate patch point)."""

    def __init__(self, message, eigenvalues=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues


class TangentRiggingError(GeometryError):
    """The rigging fails to be transverse: <L, xi_0> ~ 0."""


# ---- patch ------------------------------------------------------------------


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    n: int
    periodic: bool = False
    leaf: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"axis {self.name}: need at least 2 grid points")
        if not self.hi > self.lo:
            raise ValueError(f"axis {self.name}: empty range")

    def grid(self) -> np.ndarray:
        if self.periodic:
            h = (self.hi - self.lo) / self.n
            return self.lo + h * np.arange(self.n)
        return np.linspace(self.lo, self.hi, self.n)

    def with_count(self, n: int) -> "Axis":
        return Axis(self.name, self.lo, self.hi, n, self.periodic, self.leaf)


@dataclass
class HypersurfacePatch:
    """An embedded parameter box with named axes.

    psi_fns holds one jets-compatible callable per ambient coordinate;
    they take the chart parameters positionally (floats or Jet2).
    """

    name: str
    ambient: MetricSpec
    axes: tuple[Axis, ...]
    psi_fns: tuple[Callable, ...]
    psi_sources: tuple[str, ...] | None = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.psi_fns) != self.ambient.dim:
            raise ValueError("psi must have one component per ambient coordinate")
        if len(self.axes) != self.ambient.dim - 1:
            raise ValueError("a hypersurface patch needs dim-1 parameters")

    @property
    def chart(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes)

    @property
    def nparams(self) -> int:
        return len(self.axes)

    def embed(self, u: Sequence[float]) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.array([float(_value_of(f(*u))) for f in self.psi_fns])

    def embedding_jets(self, u: Sequence[float]):
        """(x, J, H): x[A], J[A, a] = d_a psi^A, H[A, a, b] = d_a d_b psi^A."""
        u = np.asarray(u, dtype=float)
        m = u.size
        d = self.ambient.dim
        seeds = jets.seed(u)
        x = np.empty(d)
        J = np.zeros((d, m))
        H = np.zeros((d, m, m))
        for A, f in enumerate(self.psi_fns):
            out = f(*seeds)
            if isinstance(out, jets.Jet2):
                x[A] = out.value
                J[A] = out.grad
                H[A] = out.hess
            else:
                x[A] = float(out)
        return x, J, H

    def grid_points(self) -> np.ndarray:
        """All grid points as an array (K, nparams), C-ordered over axes."""
        grids = np.meshgrid(*[a.grid() for a in self.axes], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def leaf_axis_indices(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.axes) if a.leaf)

    def transverse_axis_indices(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.axes) if not a.leaf)

    def interior_point(self) -> np.ndarray:
        return np.array([0.5 * (a.lo + a.hi) for a in self.axes])

    def contains(self, u, slack: float = 1e-9) -> bool:
        u = np.asarray(u, dtype=float)
        for i, a in enumerate(self.axes):
            span = a.hi - a.lo
            if a.periodic:
                continue
            if u[i] < a.lo - slack * span or u[i] > a.hi + slack * span:
                return False
        return True


def _value_of(v) -> float:
    return v.value if isinstance(v, jets.Jet2) else float(v)


def patch_from_exprs(
    name: str,
    ambient: MetricSpec,
    axes: Sequence[Axis],
    psi_sources: Sequence[str],
    notes: dict | None = None,
) -> HypersurfacePatch:
    chart = tuple(a.name for a in axes)
    exprs = [exprlang.parse(src, chart) for src in psi_sources]
    fns = tuple(e.__call__ for e in exprs)
    return HypersurfacePatch(
        name=name,
        ambient=ambient,
        axes=tuple(axes),
        psi_fns=fns,
        psi_sources=tuple(psi_sources),
        notes=dict(notes or {}),
    )


# ---- riggings ---------------------------------------------------------------


class Rigging:
    """A transverse vector field along the patch, in ambient components."""

    name = "L"
    ambient_field: Callable | None = None  # optional off-surface extension

    def at(self, u: np.ndarray, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class AmbientRigging(Rigging):
    """Rigging given as a vectorized ambient field x -> L(x)."""

    def __init__(self, fn: Callable, name: str = "L"):
        self.fn = fn
        self.name = name
        self.ambient_field = fn

    def at(self, u, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)


class ParamRigging(Rigging):
    """Rigging given on the parameter domain, u -> L(u)."""

    def __init__(self, fn: Callable, name: str = "L"):
        self.fn = fn
        self.name = name

    def at(self, u, x):
        return np.asarray(self.fn(np.asarray(u, dtype=float)), dtype=float)


# ---- frame and shape records --------------------------------------------------


@dataclass(frozen=True)
class FrameTolerances:
    null: float = 1e-8       # radical eigenvalue band (relative)
    tangent: float = 1e-10   # transversality floor for <L, xi_0>
    screen: float = 1e-9     # Gram-Schmidt candidate floor (relative)
    classify: float = 1e-7   # trapped classification zero band


@dataclass(frozen=True)
class FramePoint:
    u: np.ndarray
    x: np.ndarray
    J: np.ndarray                 # (dim, m) pushforward
    Hpsi: np.ndarray              # (dim, m, m) embedding Hessians
    gbar: np.ndarray              # ambient metric at x
    g_param: np.ndarray           # induced metric on parameters
    radical_eigenvalue: float
    xi0_param: np.ndarray         # unit radical eigenvector
    xi_param: np.ndarray
    xi_amb: np.ndarray
    L_amb: np.ndarray
    N_amb: np.ndarray
    eta_param: np.ndarray         # eta(d_a) = <N, d_a psi>
    screen_param: np.ndarray      # (k, m)
    screen_amb: np.ndarray        # (k, dim)

    @property
    def nscreen(self) -> int:
        return self.screen_param.shape[0]

    def decompose(self, X: np.ndarray):
        """Coefficients (c_screen, c_xi, c_N) of an ambient vector X in the
        frame (E_i, xi, N):  X = sum c_i E_i + c_xi xi + c_N N."""
        gX = self.gbar @ X
        c_screen = self.screen_amb @ gX
        c_xi = float(self.N_amb @ gX)
        c_N = float(self.xi_amb @ gX)
        return c_screen, c_xi, c_N

    def tangent_param_of(self, X: np.ndarray) -> np.ndarray:
        """Parameter components of a tangent ambient vector X."""
        c_screen, c_xi, _ = self.decompose(X)
        return c_screen @ self.screen_param + c_xi * self.xi_param


@dataclass(frozen=True)
class ShapePoint:
    frame: FramePoint
    B_param: np.ndarray           # (m, m)
    C_hat: np.ndarray             # (m, m): C(d_a, P d_b)
    tau_param: np.ndarray         # (m,)
    A_N_param: np.ndarray         # (m, m) operator on parameter basis
    A_xi_param: np.ndarray        # (m, m)
    A_N_screen: np.ndarray        # (k, k)
    A_xi_screen: np.ndarray       # (k, k)
    DN: np.ndarray                # (m, dim): covariant d_a N
    DXI: np.ndarray               # (m, dim): covariant d_a xi
    deta: np.ndarray              # (m, m): d_a eta_b - d_b eta_a
    S1: float
    star_S1: float
    checks: dict

    @property
    def u(self) -> np.ndarray:
        return self.frame.u

    @property
    def theta_out(self) -> float:
        return self.star_S1

    @property
    def theta_in(self) -> float:
        return -self.S1

    @property
    def tau_of_xi(self) -> float:
        return float(self.tau_param @ self.frame.xi_param)

    @property
    def mean_curvature(self) -> np.ndarray:
        """H = -(star S1) N - S1 xi, in ambient components."""
        return -self.star_S1 * self.frame.N_amb - self.S1 * self.frame.xi_amb

    def B_of(self, up: np.ndarray, vp: np.ndarray) -> float:
        return float(up @ self.B_param @ vp)


@dataclass(frozen=True)
class PointClass:
    label: str
    theta_out: float
    theta_in: float
    band: float
    is_mots: bool
    is_mts: bool
    is_tos: bool
    is_ts: bool


def classify_point(theta_out: float, theta_in: float, band: float) -> PointClass:
    is_mots = abs(theta_out) <= band
    is_mts = is_mots and theta_in <= band
    is_tos = theta_out < -band
    is_ts = is_tos and theta_in < -band
    if is_ts:
        label = "TS"
    elif is_mts:
        label = "MTS"
    elif is_mots:
        label = "MOTS"
    elif is_tos:
        label = "TOS"
    else:
        label = "UNTRAPPED"
    return PointClass(label, theta_out, theta_in, band, is_mots, is_mts, is_tos, is_ts)


# ---- the frame field -----------------------------------------------------------


class FrameField:
    """Deterministic pointwise frame construction with caching.

    Frames at nearby stencil points are rebuilt from scratch, which keeps
    every derived field smooth: the radical eigenvector sign cancels in
    the <L, xi_0> normalization, and the screen Gram-Schmidt runs in a
    fixed axis order.
    """

    def __init__(self, patch: HypersurfacePatch, rigging: Rigging,
                 tol: FrameTolerances | None = None):
        self.patch = patch
        self.rigging = rigging
        self.tol = tol or FrameTolerances()
        self._frames: dict[bytes, FramePoint] = {}
        self._shapes: dict[bytes, ShapePoint] = {}
        self._scale: float | None = None

    # -- frame construction ------------------------------------------------

    def frame(self, u: Sequence[float]) -> FramePoint:
        u = np.asarray(u, dtype=float)
        key = u.tobytes()
        fp = self._frames.get(key)
        if fp is None:
            fp = self._build_frame(u)
            if len(self._frames) > 200000:
                self._frames.clear()
            self._frames[key] = fp
        return fp

    def _build_frame(self, u: np.ndarray) -> FramePoint:
        patch = self.patch
        x, J, H = patch.embedding_jets(u)
        gbar = patch.ambient.metric(x)
        g_param = J.T @ gbar @ J
        g_param = 0.5 * (g_param + g_param.T)
        m = patch.nparams

        w, V = sla.eigh(g_param)
        scale = max(1.0, float(np.max(np.abs(w))))
        band = self.tol.null * scale
        null_idx = [i for i in range(m) if abs(w[i]) <= band]
        if len(null_idx) == 0:
            raise NotNullError(
                f"{patch.name}: no radical direction at u={u.tolist()} "
                f"(eigenvalues {w.tolist()})",
                eigenvalues=w,
            )
        if len(null_idx) > 1:
            raise DegenerateRankError(
                f"{patch.name}: induced metric rank drops by {len(null_idx)} "
                f"at u={u.tolist()} (eigenvalues {w.tolist()})",
                eigenvalues=w,
            )
        idx = null_idx[0]
        if np.any(w < -band):
            raise NotNullError(
                f"{patch.name}: induced metric indefinite at u={u.tolist()} "
                f"(eigenvalues {w.tolist()})",
                eigenvalues=w,
            )
        xi0 = V[:, idx].copy()
        # deterministic sign for reporting; it cancels in xi below
        j = int(np.argmax(np.abs(xi0)))
        if xi0[j] < 0:
            xi0 = -xi0

        L = np.asarray(self.rigging.at(u, x), dtype=float)
        xi0_amb = J @ xi0
        denom = float(L @ gbar @ xi0_amb)
        vec_scale = max(1.0, float(np.max(np.abs(L))), float(np.max(np.abs(xi0_amb))))
        if abs(denom) < self.tol.tangent * vec_scale:
            raise TangentRiggingError(
                f"{patch.name}: rigging tangent to the patch at u={u.tolist()} "
                f"(<L, xi_0> = {denom:.3e})"
            )
        xi_param = xi0 / denom
        xi_amb = J @ xi_param
        LL = float(L @ gbar @ L)
        N = L - 0.5 * LL * xi_amb
        eta = J.T @ (gbar @ N)

        screen_param = self._screen_basis(u, g_param, eta, xi_param)
        screen_amb = screen_param @ J.T

        return FramePoint(
            u=u, x=x, J=J, Hpsi=H, gbar=gbar, g_param=g_param,
            radical_eigenvalue=float(w[idx]),
            xi0_param=xi0, xi_param=xi_param, xi_amb=xi_amb,
            L_amb=L, N_amb=N, eta_param=eta,
            screen_param=screen_param, screen_amb=screen_amb,
        )

    def _screen_basis(self, u, g_param, eta, xi_param) -> np.ndarray:
        """Orthonormal basis of ker(eta) mod xi, by ordered Gram-Schmidt.

        Candidates e_a - eta_a xi all lie in the kernel; exactly one of
        them is radical-collinear and gets dropped by the norm floor.
        """
        m = g_param.shape[0]
        want = self.patch.ambient.dim - 2
        basis: list[np.ndarray] = []
        gscale = max(1.0, float(np.max(np.abs(g_param))))
        floor = self.tol.screen * gscale
        for a in range(m):
            wvec = np.zeros(m)
            wvec[a] = 1.0
            wvec -= eta[a] * xi_param
            for b in basis:
                wvec = wvec - float(b @ g_param @ wvec) * b
            nrm2 = float(wvec @ g_param @ wvec)
            if nrm2 <= floor:
                continue
            basis.append(wvec / math.sqrt(nrm2))
            if len(basis) == want:
                break
        if len(basis) != want:
            raise DegenerateRankError(
                f"{self.patch.name}: screen rank {len(basis)} < {want} "
                f"at u={np.asarray(u).tolist()}"
            )
        return np.stack(basis)

    # -- frame-field derivatives --------------------------------------------

    def _frame_fd(self, u: np.ndarray, extract: Callable) -> np.ndarray:
        """Central differences of a frame-derived ambient field along each
        parameter axis: out[a] = d_a extract(frame)."""
        m = self.patch.nparams
        cols = []
        for a in range(m):
            h = numerics.step_exact(u[a])
            up = u.copy(); up[a] += h
            um = u.copy(); um[a] -= h
            fp = extract(self.frame(up))
            fm = extract(self.frame(um))
            cols.append((np.asarray(fp) - np.asarray(fm)) / (2.0 * h))
        return np.stack(cols)

    # -- shape ----------------------------------------------------------------

    def shape(self, u: Sequence[float]) -> ShapePoint:
        u = np.asarray(u, dtype=float)
        key = u.tobytes()
        sp = self._shapes.get(key)
        if sp is None:
            sp = self._build_shape(u)
            if len(self._shapes) > 100000:
                self._shapes.clear()
            self._shapes[key] = sp
        return sp

    def _build_shape(self, u: np.ndarray) -> ShapePoint:
        fp = self.frame(u)
        patch = self.patch
        m = patch.nparams
        G = patch.ambient.christoffel(fp.x)
        gbar = fp.gbar

        # covariant Hessian of the embedding: dd_a d_b = H + Gamma(J, J)
        D2 = fp.Hpsi + np.einsum("ABC,Ba,Cb->Aab", G, fp.J, fp.J)

        gxi = gbar @ fp.xi_amb
        gN = gbar @ fp.N_amb
        B = np.einsum("Aab,A->ab", D2, gxi)
        B = 0.5 * (B + B.T)

        # covariant derivatives of the frame fields along coordinate axes
        dN = self._frame_fd(u, lambda f: f.N_amb)
        dXI = self._frame_fd(u, lambda f: f.xi_amb)
        dEta = self._frame_fd(u, lambda f: f.eta_param)
        DN = dN + np.einsum("ABC,Ba,C->aA", G, fp.J, fp.N_amb)
        DXI = dXI + np.einsum("ABC,Ba,C->aA", G, fp.J, fp.xi_amb)

        tau = DN @ gxi
        deta = dEta - dEta.T

        # C(d_a, P d_b) = <D2[:, a, b] - d_a(eta_b) xi - eta_b DXI_a, N>
        D2N = np.einsum("Aab,A->ab", D2, gN)
        C_hat = D2N - dEta - np.outer(DXI @ gN, fp.eta_param)

        # shape operators: A_N d_a = tau_a N - DN_a, screen part only survives
        proj_N = DN @ gbar @ fp.screen_amb.T      # (m, k): <DN_a, E_i>
        proj_XI = DXI @ gbar @ fp.screen_amb.T
        A_N_param = -(proj_N @ fp.screen_param)   # columns: A_N d_a in params
        A_N_param = A_N_param.T
        A_xi_param = -(proj_XI @ fp.screen_param).T
        A_N_screen = -(fp.screen_param @ proj_N).T
        A_xi_screen = -(fp.screen_param @ proj_XI).T

        S1 = float(np.trace(A_N_screen))
        star_S1 = float(np.trace(A_xi_screen))

        xi_p = fp.xi_param
        checks = {
            "xi_null": abs(float(fp.xi_amb @ gbar @ fp.xi_amb)),
            "N_null": abs(float(fp.N_amb @ gbar @ fp.N_amb)),
            "eta_of_xi": abs(float(fp.eta_param @ xi_p) - 1.0),
            "B_on_radical": float(np.max(np.abs(B @ xi_p))),
            "A_xi_maps_xi_to_zero": float(np.max(np.abs(A_xi_param @ xi_p))),
            "screen_orthonormal": float(
                np.max(np.abs(fp.screen_amb @ gbar @ fp.screen_amb.T - np.eye(fp.nscreen)))
            ),
            "screen_vs_N": float(np.max(np.abs(fp.screen_amb @ gN))),
            "screen_vs_xi": float(np.max(np.abs(fp.screen_amb @ gxi))),
        }

        return ShapePoint(
            frame=fp, B_param=B, C_hat=C_hat, tau_param=tau,
            A_N_param=A_N_param, A_xi_param=A_xi_param,
            A_N_screen=A_N_screen, A_xi_screen=A_xi_screen,
            DN=DN, DXI=DXI, deta=deta, S1=S1, star_S1=star_S1, checks=checks,
        )

    # -- induced connection -----------------------------------------------------

    def induced_connection(self, u: Sequence[float]) -> np.ndarray:
        """gamma[c, a, b]: tangent part of dd_{d_a} d_b in parameter
        components (the rigged connection; exact, no frame differencing
        beyond the shape stencil)."""
        sp = self.shape(np.asarray(u, dtype=float))
        fp = sp.frame
        G = self.patch.ambient.christoffel(fp.x)
        D2 = fp.Hpsi + np.einsum("ABC,Ba,Cb->Aab", G, fp.J, fp.J)
        gE = fp.gbar @ fp.screen_amb.T            # (dim, k)
        gN = fp.gbar @ fp.N_amb
        cs = np.einsum("Aab,Ai->iab", D2, gE)     # screen coefficients
        cN = np.einsum("Aab,A->ab", D2, gN)       # xi coefficient
        gamma = np.einsum("iab,ic->cab", cs, fp.screen_param) \
            + np.einsum("ab,c->cab", cN, fp.xi_param)
        return gamma

    # -- patch-level helpers -------------------------------------------------

    def sample_points(self, per_axis: int = 3, interior: bool = True) -> list[np.ndarray]:
        """Deterministic interior sample of the parameter box."""
        axes = self.patch.axes
        picks = []
        for a in axes:
            if a.periodic:
                vals = np.linspace(a.lo, a.hi, per_axis, endpoint=False)
            else:
                frac = np.linspace(0.18, 0.82, per_axis) if interior else np.linspace(0, 1, per_axis)
                vals = a.lo + frac * (a.hi - a.lo)
            picks.append(vals)
        grids = np.meshgrid(*picks, indexing="ij")
        return [np.array(p) for p in np.stack([g.ravel() for g in grids], axis=-1)]

    def patch_scale(self) -> float:
        """max |B| over a deterministic subsample; memoized."""
        if self._scale is None:
            best = 0.0
            for u in self.sample_points(3):
                try:
                    sp = self.shape(u)
                except GeometryError:
                    continue
                best = max(best, float(np.max(np.abs(sp.B_param))))
            self._scale = best
        return self._scale

    def classification_band(self) -> float:
        return self.tol.classify * max(1.0, self.patch_scale())

    def classify(self, u: Sequence[float]) -> PointClass:
        sp = self.shape(u)
        return classify_point(sp.theta_out, sp.theta_in, self.classification_band())

    # -- structural residuals ------------------------------------------------

    def structure_residuals(self, u: Sequence[float]) -> dict:
        """Runtime checks of the rigged-structure identities at a point.

        Everything here must vanish identically in exact arithmetic for
        any null patch and admissible rigging; the returned numbers are
        pure numerical noise and are asserted small by the test suite.
        """
        u = np.asarray(u, dtype=float)
        sp = self.shape(u)
        fp = sp.frame
        m = self.patch.nparams

        out = dict(sp.checks)

        # Lie derivative of the induced metric along xi equals 2B
        def gfield(v: np.ndarray) -> np.ndarray:
            return self.frame(v).g_param

        def xfield(v: np.ndarray) -> np.ndarray:
            return self.frame(v).xi_param

        dg = np.stack([
            numerics.central_diff(gfield, u, a, numerics.step_exact(u[a]))
            for a in range(m)
        ])  # dg[c, a, b] = d_c g_ab
        dxi = np.stack([
            numerics.central_diff(xfield, u, a, numerics.step_exact(u[a]))
            for a in range(m)
        ])  # dxi[a, c] = d_a xi^c
        lie = (
            np.einsum("c,cab->ab", fp.xi_param, dg)
            + np.einsum("ac,cb->ab", dxi, fp.g_param)
            + np.einsum("bc,ac->ab", dxi, fp.g_param)
        )
        # With B(U,V) = <nabla_U V, xi> the derivative of <V, xi> = 0 gives
        # <nabla_U xi, V> = -B(U,V), hence L_xi g = -2B.  The opposite-sign
        # form is reported too; it vanishes only where B does (killing case).
        out["lie_xi_g_plus_2B"] = float(np.max(np.abs(lie + 2.0 * sp.B_param)))
        out["lie_xi_g_minus_2B"] = float(np.max(np.abs(lie - 2.0 * sp.B_param)))

        # non-metricity of the rigged connection:
        # (nabla_a g)(b, c) = eta_b B_ac + eta_c B_ab
        gamma = self.induced_connection(u)
        nabla_g = (
            dg
            - np.einsum("dab,dc->abc", gamma, fp.g_param)
            - np.einsum("dac,bd->abc", gamma, fp.g_param)
        )
        model = (
            np.einsum("b,ac->abc", fp.eta_param, sp.B_param)
            + np.einsum("c,ab->abc", fp.eta_param, sp.B_param)
        )
        out["non_metricity"] = float(np.max(np.abs(nabla_g - model)))

        # screen integrability: d eta restricted to screen pairs
        Ep = fp.screen_param
        deta_screen = np.einsum("ia,jb,ab->ij", Ep, Ep, sp.deta)
        out["screen_integrability"] = float(np.max(np.abs(deta_screen)))
        out["deta_max"] = float(np.max(np.abs(sp.deta)))

        # B = g(star A_xi ., .) and C_hat = g(A_N ., P.) on parameters
        BA = np.einsum("ca,cb->ab", sp.A_xi_param, fp.g_param)
        out["B_vs_A_xi"] = float(np.max(np.abs(0.5 * (BA + BA.T) - sp.B_param)))
        P = np.eye(m) - np.outer(fp.xi_param, fp.eta_param)
        CA = np.einsum("ca,cd,db->ab", sp.A_N_param, fp.g_param, P)
        out["C_vs_A_N"] = float(np.max(np.abs(CA - sp.C_hat)))

        # best-fit conformal factor phi in A_N ~ phi * star A_xi (screen blocks)
        denom = float(np.sum(sp.A_xi_screen * sp.A_xi_screen))
        if denom > 1e-28:
            phi = float(np.sum(sp.A_N_screen * sp.A_xi_screen)) / denom
        elif float(np.max(np.abs(sp.A_N_screen))) <= 1e-14:
            phi = 1.0  # both shapes vanish; any factor fits, report unity
        else:
            phi = 0.0
        out["conformal_phi"] = phi
        out["conformality"] = float(
            np.max(np.abs(sp.A_N_screen - phi * sp.A_xi_screen))
        )

        # umbilicity: B = rho g with rho = (sum_i B(E_i, E_i)) / nscreen
        rho = sp.star_S1 / fp.nscreen
        out["umbilic_rho"] = float(rho)
        out["umbilicity"] = float(np.max(np.abs(sp.B_param - rho * fp.g_param)))
        out["geodesic"] = float(np.max(np.abs(sp.B_param)))
        return out


def degenerate_or_shape(ff: FrameField, u) -> tuple[ShapePoint | None, str | None]:
    """Shape at u, or (None, reason) for excluded points."""
    try:
        return ff.shape(u), None
    except DegenerateRankError:
        return None, "DEGENERATE_RANK"
    except TangentRiggingError:
        return None, "TANGENT_RIGGING"
    except NotNullError:
        return None, "NOT_NULL"
