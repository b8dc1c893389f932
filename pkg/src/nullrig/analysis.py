"""Curvature identities, leaf geometry, dragging and horizon verdicts.

Everything here is a consistency check or a derived observable built on top
of the pointwise frame/shape data:

* structure-level identities relating ambient curvature to the induced
  connection and the two second fundamental forms (Gauss / Codazzi style
  residuals, the focusing identity along xi, trace compatibility of the
  tangent shape operator),
* leaf geometry: each spacelike leaf of the screen foliation gets an induced
  Riemannian metric, quadrature, connection and curvature of its own,
* Lie dragging of a leaf along the rigging by a Runge-Kutta flow, with the
  null normal pair re-solved from scratch on every dragged cloud so that
  first variations of expansions and areas are measured, never transported,
* classification of the whole patch (trapping / future / outer flags).

All derivative work on exact embeddings uses the tight step policy from
`numerics`; anything that differentiates an already finite-differenced
field (tau, shape operators, expansions) uses the noisy step with one
Richardson level on top.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import linalg as sla

from . import numerics
from .hypersurface import (
    Axis,
    AmbientRigging,
    FrameField,
    GeometryError,
    HypersurfacePatch,
)

__all__ = [
    "NotUmbilicError",
    "ScreenNotIntegrableError",
    "LeafStructureError",
    "NotSpacelikeError",
    "induced_curvature",
    "raychaudhuri_residual",
    "newton_trace_residual",
    "gauss_codazzi_residuals",
    "umbilic_ode_residual",
    "parallel_mean_curvature_residual",
    "LeafPatch",
    "leaf_patches",
    "leaf_curvature",
    "DragSection",
    "DragResult",
    "lie_drag",
    "expansion_variation",
    "area_variation",
    "HorizonVerdict",
    "horizon_classify",
]

UMBILIC_GATE = 1e-6
INTEGRABLE_GATE = 1e-6


class NotUmbilicError(GeometryError):
    """Shear is too large for the umbilic evolution equations to apply."""


class ScreenNotIntegrableError(GeometryError):
    """The screen distribution has no leaves to speak of."""


class LeafStructureError(GeometryError):
    """The patch does not mark a spacelike leaf block in its axes."""


class NotSpacelikeError(GeometryError):
    """A dragged cloud stopped being spacelike."""


def _directional(fn, u, v, h):
    # one Richardson level on top of the central stencil
    d1 = numerics.directional_diff(fn, u, v, h)
    d2 = numerics.directional_diff(fn, u, v, 0.5 * h)
    return (4.0 * d2 - d1) / 3.0


def _grad_field(fn, u, step):
    """Stack d_a fn(u) over all parameter axes (Richardson central)."""
    u = np.asarray(u, dtype=float)
    return np.stack([
        numerics.central_diff_richardson(fn, u, a, step(u[a]))
        for a in range(u.size)
    ])


# ---- curvature of the induced connection --------------------------------------


def induced_curvature(ff: FrameField, u) -> np.ndarray:
    """R[d, c, a, b]: component d of R(d_a, d_b) d_c for the rigged connection.

    Assembled from finite differences of the connection coefficients; the
    coefficients themselves come out of exact embedding jets, so the tight
    step applies.
    """
    u = np.asarray(u, dtype=float)
    gamma = ff.induced_connection(u)
    dgam = _grad_field(ff.induced_connection, u, numerics.step_exact)
    term1 = np.einsum("adbc->dcab", dgam)
    term2 = np.einsum("bdac->dcab", dgam)
    term3 = np.einsum("dae,ebc->dcab", gamma, gamma)
    term4 = np.einsum("dbe,eac->dcab", gamma, gamma)
    return term1 - term2 + term3 - term4


def raychaudhuri_residual(ff: FrameField, u) -> float:
    """|Ric(xi, xi) - (xi . S + tau(xi) S - tr A^2)| with S the null expansion.

    Left side is ambient-only, right side is hypersurface-only, so agreement
    genuinely ties the two computations together.
    """
    u = np.asarray(u, dtype=float)
    sp = ff.shape(u)
    fp = sp.frame
    ric = ff.patch.ambient.curvature(fp.x).ricci
    lhs = float(fp.xi_amb @ ric @ fp.xi_amb)
    h = numerics.step_noisy(float(np.max(np.abs(u))))
    xi_dS = _directional(lambda v: ff.shape(v).star_S1, u, fp.xi_param, h)
    A = sp.A_xi_screen
    rhs = xi_dS + sp.tau_of_xi * sp.star_S1 - float(np.trace(A @ A))
    return abs(lhs - rhs)


def newton_trace_residual(ff: FrameField, u, direction=None) -> float:
    """|tr(nabla_U A) - U . tr A| for the tangent shape operator.

    The trace of the covariant derivative of a (1,1) tensor along U must be
    the derivative of the trace; failures flag a broken connection or a
    broken shape operator.  Default direction is xi.
    """
    u = np.asarray(u, dtype=float)
    sp = ff.shape(u)
    fp = sp.frame
    U = fp.xi_param if direction is None else np.asarray(direction, dtype=float)
    h = numerics.step_noisy(float(np.max(np.abs(u))))
    dA = _directional(lambda v: ff.shape(v).A_xi_param, u, U, h)
    gamma = ff.induced_connection(u)
    GU = np.einsum("cae,a->ce", gamma, U)
    covA = dA + GU @ sp.A_xi_param - sp.A_xi_param @ GU
    lhs = float(np.trace(covA))
    rhs = _directional(lambda v: ff.shape(v).star_S1, u, U, h)
    return abs(lhs - rhs)


def _cov_deriv_2form(dT, gamma, T):
    # (nabla_a T)[b, c] for a parameter-index (0,2) tensor
    return (dT
            - np.einsum("eab,ec->abc", gamma, T)
            - np.einsum("eac,be->abc", gamma, T))


def gauss_codazzi_residuals(ff: FrameField, u) -> dict:
    """Residuals of the curvature decomposition along xi, N and the screen.

    Returns max-abs residuals keyed by family.  Both second fundamental
    forms kill xi, so plain tensor derivatives of their parameter components
    are exactly the covariant derivatives the identities call for once the
    free slot is paired with a screen direction.
    """
    u = np.asarray(u, dtype=float)
    sp = ff.shape(u)
    fp = sp.frame
    m = ff.patch.nparams
    J = fp.J
    curv = ff.patch.ambient.curvature(fp.x)
    Rlow = curv.riemann_low

    # <Rbar(d_a, d_b) d_c, e_A> for every ambient index A
    RbarT = np.einsum("ABCD,Ca,Db,Bc->abcA", Rlow, J, J, J)
    lhs_screen = np.einsum("abcA,eA->abce", RbarT, fp.screen_amb)
    lhs_xi = RbarT @ fp.xi_amb
    lhs_N = RbarT @ fp.N_amb

    Rind = induced_curvature(ff, u)
    gs = fp.screen_param @ fp.g_param
    Rind_screen = np.einsum("dcab,ed->abce", Rind, gs)
    Rind_N = np.einsum("dcab,d->abc", Rind, fp.eta_param)

    B = sp.B_param
    C = sp.C_hat
    tau = sp.tau_param
    gamma = ff.induced_connection(u)
    dB = _grad_field(lambda v: ff.shape(v).B_param, u, numerics.step_noisy)
    dC = _grad_field(lambda v: ff.shape(v).C_hat, u, numerics.step_noisy)
    dtau = _grad_field(lambda v: ff.shape(v).tau_param, u, numerics.step_noisy)
    covB = _cov_deriv_2form(dB, gamma, B)
    covC = _cov_deriv_2form(dC, gamma, C)

    out = {}
    Cs = C @ fp.screen_param.T
    rhs = (Rind_screen
           + np.einsum("ac,be->abce", B, Cs)
           - np.einsum("bc,ae->abce", B, Cs))
    out["gauss_tangent"] = float(np.max(np.abs(lhs_screen - rhs)))

    out["gauss_transverse"] = float(np.max(np.abs(lhs_N - Rind_N)))

    skewC = (covC - np.einsum("abc->bac", covC)
             + np.einsum("ac,b->abc", C, tau)
             - np.einsum("bc,a->abc", C, tau))
    lhs_CN = np.einsum("abc,ec->abe", lhs_N, fp.screen_param)
    rhs_CN = np.einsum("abc,ec->abe", skewC, fp.screen_param)
    out["codazzi_transverse"] = float(np.max(np.abs(lhs_CN - rhs_CN)))

    skewB = (covB - np.einsum("abc->bac", covB)
             + np.einsum("bc,a->abc", B, tau)
             - np.einsum("ac,b->abc", B, tau))
    out["codazzi_tangent"] = float(np.max(np.abs(lhs_xi - skewB)))

    lhs_perp = np.einsum("abcA,c,A->ab", RbarT, fp.xi_param, fp.N_amb)
    ddtau = dtau - dtau.T
    rhs_perp = sp.A_xi_param.T @ C - C @ sp.A_xi_param - ddtau
    out["ricci_normal"] = float(np.max(np.abs(lhs_perp - rhs_perp)))

    leaf_idx = ff.patch.leaf_axis_indices()
    if leaf_idx:
        eta_leaf = float(np.max(np.abs(fp.eta_param[list(leaf_idx)])))
        if eta_leaf < 1e-8 * max(1.0, ff.patch_scale()):
            out["gauss_leaf"] = _leaf_gauss_residual(ff, u, leaf_idx, sp, Rlow)

    c = ff.patch.ambient.constant_curvature
    if c is not None:
        out.update(_space_form_residuals(ff, u, sp, c, Rind, covB, leaf_idx))
    return out


def _leaf_gauss_residual(ff, u, leaf_idx, sp, Rlow) -> float:
    fp = sp.frame
    idx = list(leaf_idx)
    Jl = fp.J[:, idx]
    lhsL = np.einsum("ABCD,Ai,Bj,Ck,Dl->ijkl", Rlow, Jl, Jl, Jl, Jl)
    leaf = LeafPatch(ff, anchor=u)
    w = np.asarray(u, dtype=float)[idx]
    starR = leaf.curvature_low(w)
    Bl = sp.B_param[np.ix_(idx, idx)]
    Cl = sp.C_hat[np.ix_(idx, idx)]
    rhsL = (starR
            + np.einsum("kj,li->ijkl", Bl, Cl) - np.einsum("lj,ki->ijkl", Bl, Cl)
            + np.einsum("kj,li->ijkl", Cl, Bl) - np.einsum("lj,ki->ijkl", Cl, Bl))
    return float(np.max(np.abs(lhsL - rhsL)))


def _space_form_residuals(ff, u, sp, c, Rind, covB, leaf_idx) -> dict:
    """Extra identities valid when the ambient has constant curvature c."""
    fp = sp.frame
    res = ff.structure_residuals(u)
    phi = res.get("conformal_phi")
    out = {}
    s = fp.screen_param
    k = fp.nscreen
    delta = np.eye(k)
    Bs = s @ sp.B_param @ s.T
    Rlow_ind = np.einsum("ed,dcab->ecab", fp.g_param, Rind)
    Rs = np.einsum("ecab,ie,jc,ka,lb->ijkl", Rlow_ind, s, s, s, s)
    model = c * (np.einsum("lj,ki->ijkl", delta, delta)
                 - np.einsum("kj,li->ijkl", delta, delta))
    if phi is not None:
        model = model + phi * (np.einsum("lj,ki->ijkl", Bs, Bs)
                               - np.einsum("kj,li->ijkl", Bs, Bs))
    out["space_form_gauss"] = float(np.max(np.abs(Rs - model)))

    tauB = covB + np.einsum("a,bc->abc", sp.tau_param, sp.B_param)
    Ts = np.einsum("abc,ia,jb,kc->ijk", tauB, s, s, s)
    out["codazzi_symmetric"] = float(np.max(np.abs(Ts - np.einsum("ijk->jik", Ts))))

    if leaf_idx and phi is not None:
        idx = list(leaf_idx)
        eta_leaf = float(np.max(np.abs(fp.eta_param[idx])))
        if eta_leaf < 1e-8 * max(1.0, ff.patch_scale()):
            leaf = LeafPatch(ff, anchor=u)
            w = np.asarray(u, dtype=float)[idx]
            starR = leaf.curvature_low(w)
            G = leaf.metric(w)
            Bl = sp.B_param[np.ix_(idx, idx)]
            modelL = (c * (np.einsum("lj,ki->ijkl", G, G)
                           - np.einsum("kj,li->ijkl", G, G))
                      + 2.0 * phi * (np.einsum("lj,ki->ijkl", Bl, Bl)
                                     - np.einsum("kj,li->ijkl", Bl, Bl)))
            out["space_form_leaf"] = float(np.max(np.abs(starR - modelL)))
    return out


# ---- umbilic evolution and mean curvature --------------------------------------


def umbilic_ode_residual(ff: FrameField, u) -> tuple[float, float]:
    """Residuals of the Riccati evolution of the umbilic factor rho.

    Along xi: xi . rho + rho tau(xi) - rho^2 = 0.  Across the screen the
    gradient has to cancel against rho tau.  Raises NotUmbilicError when the
    trace-free part of the tangent shape operator is not negligible.
    """
    u = np.asarray(u, dtype=float)
    res = ff.structure_residuals(u)
    scale = max(1.0, ff.patch_scale())
    if res["umbilicity"] > UMBILIC_GATE * scale:
        raise NotUmbilicError(
            f"{ff.patch.name}: umbilicity residual {res['umbilicity']:.3e} "
            f"at {u.tolist()}")
    sp = ff.shape(u)
    fp = sp.frame
    k = fp.nscreen
    rho_fn = lambda v: ff.shape(v).star_S1 / k
    rho = sp.star_S1 / k
    h = numerics.step_noisy(float(np.max(np.abs(u))))
    xi_rho = _directional(rho_fn, u, fp.xi_param, h)
    r1 = abs(xi_rho + rho * sp.tau_of_xi - rho * rho)
    r2 = 0.0
    for E in fp.screen_param:
        e_rho = _directional(rho_fn, u, E, h)
        r2 = max(r2, abs(e_rho + rho * float(sp.tau_param @ E)))
    return (float(r1), float(r2))


def parallel_mean_curvature_residual(ff: FrameField, u) -> float:
    """Normal-bundle derivative of the mean curvature vector vs its closed form.

    For each screen direction X the xi and N components of the ambient
    derivative of H must reproduce -X(S1) + S1 tau(X) and
    -X(star S1) - star S1 tau(X).
    """
    u = np.asarray(u, dtype=float)
    sp = ff.shape(u)
    fp = sp.frame
    amb = ff.patch.ambient
    dH = _grad_field(lambda v: ff.shape(v).mean_curvature, u, numerics.step_noisy)
    Gamb = amb.christoffel(fp.x)
    H = sp.mean_curvature
    h = numerics.step_noisy(float(np.max(np.abs(u))))
    worst = 0.0
    for X in fp.screen_param:
        X_amb = fp.J @ X
        covH = X @ dH + np.einsum("ABC,B,C->A", Gamb, X_amb, H)
        _, c_xi, c_N = fp.decompose(covH)
        tauX = float(sp.tau_param @ X)
        dS1 = _directional(lambda v: ff.shape(v).S1, u, X, h)
        dstar = _directional(lambda v: ff.shape(v).star_S1, u, X, h)
        worst = max(worst,
                    abs(c_xi - (-dS1 + sp.S1 * tauX)),
                    abs(c_N - (-dstar - sp.star_S1 * tauX)))
    return float(worst)


# ---- leaves --------------------------------------------------------------------


@dataclass
class LeafPatch:
    """One spacelike leaf: the block of leaf axes at frozen transverse values.

    Carries its own quadrature, induced Riemannian metric, connection and
    curvature, all expressed in the leaf coordinates w.
    """

    field: FrameField
    anchor: np.ndarray
    nodes_per_axis: Optional[int] = None

    def __post_init__(self):
        self.anchor = np.asarray(self.anchor, dtype=float)
        patch = self.field.patch
        self.leaf_idx = list(patch.leaf_axis_indices())
        if not self.leaf_idx:
            raise LeafStructureError(f"{patch.name}: no leaf axes declared")
        self.axes = [patch.axes[i] for i in self.leaf_idx]
        quads = []
        for ax in self.axes:
            n = self.nodes_per_axis or ax.n
            quads.append(numerics.axis_quadrature(ax.lo, ax.hi, n, ax.periodic))
        self.nodes, self.weights = numerics.product_quadrature(quads)
        self._check_leaf()

    # -- structure -----------------------------------------------------------

    @property
    def ndim(self) -> int:
        return len(self.leaf_idx)

    def label(self) -> tuple:
        keep = [i for i in range(self.anchor.size) if i not in self.leaf_idx]
        return tuple(float(self.anchor[i]) for i in keep)

    def lift(self, w) -> np.ndarray:
        u = self.anchor.copy()
        u[self.leaf_idx] = np.asarray(w, dtype=float)
        return u

    def _check_leaf(self):
        scale = max(1.0, self.field.patch_scale())
        for w in (self.nodes[0], self.nodes[len(self.nodes) // 2]):
            fp = self.field.frame(self.lift(w))
            eta_leaf = float(np.max(np.abs(fp.eta_param[self.leaf_idx])))
            if eta_leaf > 1e-8 * scale:
                raise LeafStructureError(
                    f"{self.field.patch.name}: leaf axes are not screen "
                    f"directions, eta residual {eta_leaf:.3e}")
            if np.min(sla.eigvalsh(self.metric(w))) <= 0.0:
                raise NotSpacelikeError(
                    f"{self.field.patch.name}: leaf metric not positive "
                    f"definite at {self.lift(w).tolist()}")

    # -- metric and measure ----------------------------------------------------

    def metric(self, w) -> np.ndarray:
        fp = self.field.frame(self.lift(w))
        return fp.g_param[np.ix_(self.leaf_idx, self.leaf_idx)]

    def area(self) -> float:
        vals = [math.sqrt(max(np.linalg.det(self.metric(w)), 0.0))
                for w in self.nodes]
        return float(self.weights @ np.asarray(vals))

    def integrate(self, fn: Callable) -> float:
        """Integrate fn(u, shape_point) against the leaf volume measure."""
        total = 0.0
        for w, wt in zip(self.nodes, self.weights):
            u = self.lift(w)
            sp = self.field.shape(u)
            dens = math.sqrt(max(np.linalg.det(self.metric(w)), 0.0))
            total += wt * dens * fn(u, sp)
        return float(total)

    def shape_points(self):
        return [self.field.shape(self.lift(w)) for w in self.nodes]

    # -- intrinsic curvature ----------------------------------------------------

    def connection(self, w) -> np.ndarray:
        """Leaf Christoffels Gamma[c, a, b] from the induced metric."""
        w = np.asarray(w, dtype=float)
        dG = _grad_field(self.metric, w, numerics.step_exact)
        G = self.metric(w)
        rhs = 0.5 * (np.einsum("adb->dab", dG) + np.einsum("bda->dab", dG)
                     - np.einsum("dab->dab", dG))
        return sla.solve(G, rhs.reshape(self.ndim, -1),
                         assume_a="pos").reshape(G.shape[0], *rhs.shape[1:])

    def curvature_low(self, w) -> np.ndarray:
        """starR[i, j, k, l] = <starR(d_k, d_l) d_j, d_i> on the leaf."""
        w = np.asarray(w, dtype=float)
        gamma = self.connection(w)
        dgam = _grad_field(self.connection, w, numerics.step_noisy)
        up = (np.einsum("adbc->dcab", dgam) - np.einsum("bdac->dcab", dgam)
              + np.einsum("dae,ebc->dcab", gamma, gamma)
              - np.einsum("dbe,eac->dcab", gamma, gamma))
        return np.einsum("id,djkl->ijkl", self.metric(w), up)

    def sectional(self, w, i: int = 0, j: int = 1) -> float:
        R = self.curvature_low(w)
        G = self.metric(w)
        num = R[i, j, i, j]
        den = G[i, i] * G[j, j] - G[i, j] ** 2
        return float(num / den)

    def center(self) -> np.ndarray:
        return np.asarray([0.5 * (ax.lo + ax.hi) for ax in self.axes])


def leaf_patches(ff: FrameField, nodes_per_axis: Optional[int] = None) -> list:
    """One LeafPatch per transverse grid node."""
    patch = ff.patch
    tr_idx = patch.transverse_axis_indices()
    if len(tr_idx) + len(patch.leaf_axis_indices()) != patch.nparams:
        raise LeafStructureError(f"{patch.name}: axes neither leaf nor transverse")
    grids = [np.linspace(patch.axes[i].lo, patch.axes[i].hi, patch.axes[i].n)
             for i in tr_idx]
    out = []
    for combo in np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, len(tr_idx)):
        anchor = np.asarray(ff.patch.interior_point(), dtype=float)
        anchor[list(tr_idx)] = combo
        out.append(LeafPatch(ff, anchor, nodes_per_axis=nodes_per_axis))
    return out


def leaf_curvature(leaf: LeafPatch, w=None, plane=(0, 1)) -> tuple[float, Optional[float]]:
    """(measured, predicted) sectional curvature of the leaf.

    The prediction is only available in constant-curvature ambients: c for a
    totally geodesic patch, c + 2 phi rho^2 when the patch is umbilic with a
    conformally tied pair of shape operators.  Otherwise None.
    """
    w = leaf.center() if w is None else np.asarray(w, dtype=float)
    measured = leaf.sectional(w, *plane)
    amb = leaf.field.patch.ambient
    c = amb.constant_curvature
    if c is None:
        return measured, None
    u = leaf.lift(w)
    res = leaf.field.structure_residuals(u)
    scale = max(1.0, leaf.field.patch_scale())
    if res["geodesic"] <= UMBILIC_GATE * scale:
        return measured, float(c)
    if (res["umbilicity"] <= UMBILIC_GATE * scale
            and res.get("conformality", np.inf) <= UMBILIC_GATE * scale):
        k = leaf.field.frame(u).nscreen
        rho = leaf.field.shape(u).star_S1 / k
        phi = res["conformal_phi"]
        return measured, float(c + 2.0 * phi * rho * rho)
    return measured, None


# ---- dragging ------------------------------------------------------------------


@dataclass
class DragSection:
    """One dragged copy of a leaf: points plus re-measured expansions."""

    epsilon: float
    points: np.ndarray
    area: float
    theta_out: np.ndarray
    theta_in: np.ndarray


@dataclass
class DragResult:
    leaf: LeafPatch
    epsilons: np.ndarray
    sections: list

    @property
    def areas(self) -> np.ndarray:
        return np.asarray([s.area for s in self.sections])

    def section(self, eps: float) -> DragSection:
        i = int(np.argmin(np.abs(self.epsilons - eps)))
        if not math.isclose(self.epsilons[i], eps, rel_tol=0.0, abs_tol=1e-15):
            raise KeyError(f"no section at epsilon={eps}")
        return self.sections[i]

    def to_csv(self) -> str:
        lines = ["epsilon,area,theta_out,theta_in"]
        for s in self.sections:
            row = (s.epsilon, s.area,
                   float(np.mean(s.theta_out)), float(np.mean(s.theta_in)))
            lines.append(",".join(format(v, ".17g") for v in row))
        return "\n".join(lines) + "\n"


def _drag_stencil(axes: Sequence[Axis]):
    """Offsets for first and second derivatives in the leaf coordinates.

    Center, axis steps at h and h/2, and corner steps at (h, h) and
    (h/2, h/2) for every axis pair; enough for Richardson on both the
    tangent and the Hessian stencils.
    """
    k = len(axes)
    hs = np.asarray([1e-2 * (1.0 + 0.5 * (abs(ax.lo) + abs(ax.hi))) for ax in axes])
    offsets = [np.zeros(k)]
    index = {"center": 0}
    for i in range(k):
        for scale in (1.0, 0.5):
            for sign in (1.0, -1.0):
                off = np.zeros(k)
                off[i] = sign * scale * hs[i]
                index[(i, sign, scale)] = len(offsets)
                offsets.append(off)
    for i in range(k):
        for j in range(i + 1, k):
            for scale in (1.0, 0.5):
                for si in (1.0, -1.0):
                    for sj in (1.0, -1.0):
                        off = np.zeros(k)
                        off[i] = si * scale * hs[i]
                        off[j] = sj * scale * hs[j]
                        index[(i, j, si, sj, scale)] = len(offsets)
                        offsets.append(off)
    return np.asarray(offsets), index, hs


def _null_pair(T, gbar, n_ref):
    """Solve for the null normal pair of a spacelike cloud point.

    T holds the tangent rows; the normal plane is the null space of T gbar.
    Inside it the metric has signature (-, +), giving exactly two null
    lines.  The line not parallel to the reference field becomes xi-hat with
    <n_ref, xi-hat> = 1, the other becomes N-hat with <N-hat, xi-hat> = 1.
    """
    basis = sla.null_space(T @ gbar)
    if basis.shape[1] != 2:
        raise NotSpacelikeError("normal plane is not two dimensional")
    Q = basis.T @ gbar @ basis
    lam, V = sla.eigh(Q)
    if not (lam[0] < 0.0 < lam[1]):
        raise NotSpacelikeError("normal plane is not timelike")
    e_minus = basis @ (V[:, 0] / math.sqrt(-lam[0]))
    e_plus = basis @ (V[:, 1] / math.sqrt(lam[1]))
    line_a = e_minus + e_plus
    line_b = e_minus - e_plus
    pa = float(n_ref @ gbar @ line_a)
    pb = float(n_ref @ gbar @ line_b)
    if abs(pa) >= abs(pb):
        xi_hat, other, pairing = line_a, line_b, pa
    else:
        xi_hat, other, pairing = line_b, line_a, pb
    if abs(pairing) < 1e-10:
        raise NotSpacelikeError("reference rigging degenerate against cloud")
    xi_hat = xi_hat / pairing
    other = other / float(other @ gbar @ xi_hat)
    return xi_hat, other


def _section_geometry(X, index, hs, ambient, weights, field_fn, eps):
    """Area and expansions of one dragged cloud.

    X has shape (S, P, n): stencil offset by cloud point by ambient
    coordinate.  Tangents and embedding Hessians come from Richardson
    differences across the stencil; the null pair is re-solved pointwise.
    """
    k = len(hs)
    P = X.shape[1]
    x0 = X[index["center"]]

    def first(i):
        d1 = (X[index[(i, 1.0, 1.0)]] - X[index[(i, -1.0, 1.0)]]) / (2.0 * hs[i])
        d2 = (X[index[(i, 1.0, 0.5)]] - X[index[(i, -1.0, 0.5)]]) / hs[i]
        return (4.0 * d2 - d1) / 3.0

    def second(i, j):
        if i == j:
            dh = (X[index[(i, 1.0, 1.0)]] + X[index[(i, -1.0, 1.0)]]
                  - 2.0 * x0) / hs[i] ** 2
            dh2 = (X[index[(i, 1.0, 0.5)]] + X[index[(i, -1.0, 0.5)]]
                   - 2.0 * x0) / (0.5 * hs[i]) ** 2
        else:
            a, b = (i, j) if i < j else (j, i)

            def cross(scale):
                pp = X[index[(a, b, 1.0, 1.0, scale)]]
                mm = X[index[(a, b, -1.0, -1.0, scale)]]
                pm = X[index[(a, b, 1.0, -1.0, scale)]]
                mp = X[index[(a, b, -1.0, 1.0, scale)]]
                return (pp + mm - pm - mp) / (4.0 * scale * scale * hs[a] * hs[b])

            dh, dh2 = cross(1.0), cross(0.5)
        return (16.0 * dh2 - dh) / 15.0

    tangents = np.stack([first(i) for i in range(k)])          # (k, P, n)
    gbar = ambient.metric_batch(x0)                            # (P, n, n)
    G = np.einsum("ipA,pAB,jpB->pij", tangents, gbar, tangents)
    if np.min(np.linalg.eigvalsh(G)) <= 0.0:
        raise NotSpacelikeError(f"dragged cloud at eps={eps} is not spacelike")
    dets = np.linalg.det(G)
    area = float(weights @ np.sqrt(dets))

    hess = np.empty((k, k, P, X.shape[2]))
    for i in range(k):
        for j in range(i, k):
            hess[i, j] = hess[j, i] = second(i, j)

    Gamb = ambient.christoffel_batch(x0)                       # (P, n, n, n)
    sec = hess + np.einsum("pABC,ipB,jpC->ijpA", Gamb, tangents, tangents)
    n_ref = field_fn(x0)
    Ginv = np.linalg.inv(G)
    theta_out = np.empty(P)
    theta_in = np.empty(P)
    for p in range(P):
        xi_hat, n_hat = _null_pair(tangents[:, p, :], gbar[p], n_ref[p])
        Bhat = np.einsum("ijA,AB,B->ij", sec[:, :, p, :], gbar[p], xi_hat)
        Chat = np.einsum("ijA,AB,B->ij", sec[:, :, p, :], gbar[p], n_hat)
        theta_out[p] = np.sum(Ginv[p] * Bhat)
        theta_in[p] = -np.sum(Ginv[p] * Chat)
    return DragSection(float(eps), x0.copy(), area, theta_out, theta_in)


def lie_drag(leaf: LeafPatch, epsilons, field_fn=None, steps=None) -> DragResult:
    """Flow a leaf along the rigging field and re-measure it at each epsilon.

    Every quadrature node is surrounded by a derivative stencil, the whole
    cloud is pushed with a fixed-step Runge-Kutta integrator, and on each
    dragged copy the tangents, induced metric, null normal pair and both
    expansions are solved from scratch.  Nothing is transported.
    """
    ff = leaf.field
    patch = ff.patch
    if field_fn is None:
        rig = ff.rigging
        if not isinstance(rig, AmbientRigging):
            raise LeafStructureError(
                f"{patch.name}: rigging has no ambient extension to flow along")
        field_fn = rig.ambient_field
    offsets, index, hs = _drag_stencil(leaf.axes)
    base = np.stack([
        np.stack([patch.embed(leaf.lift(w + off)) for w in leaf.nodes])
        for off in offsets
    ])                                                          # (S, P, n)
    S, P, n = base.shape
    flat = base.reshape(-1, n)
    epsilons = np.asarray(sorted(float(e) for e in np.atleast_1d(epsilons)))
    sections = []
    for eps in epsilons:
        if eps == 0.0:
            X = base
        else:
            nsteps = steps if steps is not None else numerics.flow_steps(eps)
            X = numerics.rk4_flow(field_fn, flat, eps, nsteps).reshape(S, P, n)
        sections.append(_section_geometry(
            X, index, hs, patch.ambient, leaf.weights, field_fn, eps))
    return DragResult(leaf=leaf, epsilons=epsilons, sections=sections)


def expansion_variation(drag: DragResult) -> tuple[float, np.ndarray]:
    """delta_N theta_out at epsilon 0 by Richardson differencing the drag.

    Needs sections at +-h and +-h/2; returns (leaf mean, per point array).
    """
    h = float(np.max(np.abs(drag.epsilons)))
    if h <= 0.0:
        raise ValueError("drag holds no nonzero epsilons")
    th = {}
    for e in (h, -h, 0.5 * h, -0.5 * h):
        th[e] = drag.section(e).theta_out
    d1 = (th[h] - th[-h]) / (2.0 * h)
    d2 = (th[0.5 * h] - th[-0.5 * h]) / h
    per_point = (4.0 * d2 - d1) / 3.0
    return float(np.mean(per_point)), per_point


def area_variation(drag: DragResult) -> dict:
    """First variation of leaf area against the mean curvature pairing.

    The geometric side dA/deps comes from Richardson differencing the
    dragged areas; the integral side pairs the mean curvature vector with
    the drag field over the undragged leaf.  Both expansions are integrated
    too so the report can say which one the variation actually equals.
    """
    h = float(np.max(np.abs(drag.epsilons)))
    if h <= 0.0:
        raise ValueError("drag holds no nonzero epsilons")
    areas = {e: drag.section(e).area for e in (h, -h, 0.5 * h, -0.5 * h)}
    d1 = (areas[h] - areas[-h]) / (2.0 * h)
    d2 = (areas[0.5 * h] - areas[-0.5 * h]) / h
    dA = (4.0 * d2 - d1) / 3.0

    leaf = drag.leaf
    ff = leaf.field
    rig = ff.rigging
    field_fn = rig.ambient_field if isinstance(rig, AmbientRigging) else None
    amb = ff.patch.ambient

    def pair_H(u, sp):
        drag_vec = (field_fn(sp.frame.x) if field_fn is not None
                    else sp.frame.N_amb)
        return float(sp.mean_curvature @ amb.metric(sp.frame.x) @ drag_vec)

    int_HN = leaf.integrate(pair_H)
    int_out = leaf.integrate(lambda u, sp: sp.theta_out)
    int_in = leaf.integrate(lambda u, sp: sp.theta_in)
    label = ("theta_in" if abs(int_HN - int_in) <= abs(int_HN - int_out)
             else "theta_out")
    gap = abs(dA - int_HN) / max(abs(dA), 1e-8)
    return {
        "dA_deps": float(dA),
        "integral_H_N": float(int_HN),
        "rel_gap": float(gap),
        "integral_theta_out": float(int_out),
        "integral_theta_in": float(int_in),
        "variation_integrand": label,
    }


# ---- horizon classification ----------------------------------------------------


@dataclass
class HorizonVerdict:
    patch_name: str
    band: float
    trapping_horizon: bool
    future: bool
    outer: bool
    minimal: bool
    minimal_consistent: bool
    per_leaf: tuple

    @property
    def neh(self) -> bool:
        # a trapping horizon whose leaves never expand is a nonexpanding one
        return self.trapping_horizon

    @property
    def foth(self) -> bool:
        return self.trapping_horizon and self.future and self.outer

    def labels(self) -> list:
        out = []
        if self.trapping_horizon:
            out += ["TRAPPING_HORIZON", "NEH"]
        if self.future:
            out.append("FUTURE")
        if self.outer:
            out.append("OUTER")
        if self.foth:
            out.append("FOTH")
        if self.minimal:
            out.append("MINIMAL")
        return out


def horizon_classify(ff: FrameField, band: Optional[float] = None,
                     deps: float = 5e-3, drag_nodes: int = 4,
                     check_outer: bool = True) -> HorizonVerdict:
    """Classify the whole patch from its leaves.

    Trapping: theta_out vanishes on every leaf.  Future: theta_in stays
    negative.  Outer: dragging along the rigging drives theta_out down on
    every leaf.  Minimality of the patch is recomputed from the pure trace
    of B over the screen as an independent cross check of the trapping flag.
    """
    patch = ff.patch
    if not patch.leaf_axis_indices():
        raise LeafStructureError(
            f"{patch.name}: no closed leaves to classify; "
            "use the graph-surface report instead")
    scale = max(1.0, ff.patch_scale())
    integ = max(ff.structure_residuals(u)["screen_integrability"]
                for u in ff.sample_points(3))
    if integ > INTEGRABLE_GATE * scale:
        raise ScreenNotIntegrableError(
            f"{patch.name}: screen integrability residual {integ:.3e}")
    if band is None:
        band = ff.classification_band()

    leaves = leaf_patches(ff)
    per_leaf = []
    trapping = future = outer = minimal = True
    for leaf in leaves:
        sps = leaf.shape_points()
        th_out = np.asarray([sp.theta_out for sp in sps])
        th_in = np.asarray([sp.theta_in for sp in sps])
        trB = np.asarray([
            float(np.einsum("ia,ab,ib->", sp.frame.screen_param, sp.B_param,
                            sp.frame.screen_param))
            for sp in sps])
        rec = {
            "label": leaf.label(),
            "max_theta_out": float(np.max(np.abs(th_out))),
            "max_theta_in": float(np.max(th_in)),
            "area": leaf.area(),
            "trace_B": float(np.max(np.abs(trB))),
        }
        leaf_trapping = rec["max_theta_out"] <= band
        leaf_future = bool(np.all(th_in < -band))
        leaf_minimal = rec["trace_B"] <= band
        rec["trapping"] = leaf_trapping
        rec["future"] = leaf_future
        if check_outer:
            small = LeafPatch(ff, leaf.anchor, nodes_per_axis=drag_nodes)
            drag = lie_drag(small, [deps, -deps, 0.5 * deps, -0.5 * deps])
            delta, per_point = expansion_variation(drag)
            rec["delta_theta_out"] = delta
            leaf_outer = bool(np.all(per_point < -band))
            rec["outer"] = leaf_outer
        else:
            leaf_outer = False
            rec["outer"] = None
        per_leaf.append(rec)
        trapping &= leaf_trapping
        future &= leaf_future
        outer &= leaf_outer
        minimal &= leaf_minimal
    return HorizonVerdict(
        patch_name=patch.name,
        band=float(band),
        trapping_horizon=bool(trapping),
        future=bool(future),
        outer=bool(outer and check_outer),
        minimal=bool(minimal),
        minimal_consistent=bool(trapping == minimal),
        per_leaf=tuple(per_leaf),
    )
