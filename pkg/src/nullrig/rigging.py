"""Change of rigging N -> phi N + zeta and its transformation identities.

For a nowhere-zero scalar phi and a tangent field zeta the new rigging
determines a new rigged structure, related to the old one by

    xi~     = xi / phi
    B~      = B / phi
    P~      = P - (1/phi) g(zeta, .) xi
    conn~   = conn - (1/phi) B(., .) zeta
    tau~    = tau + d ln|phi| + (1/phi) B(zeta, .)
    A~_xi~  = (1/phi) A_xi - (1/phi^2) B(zeta, .) xi
    A~_N~   = phi A_N - conn_. zeta + tau~(.) zeta

plus the admissibility constraint 2 phi eta(zeta) + <zeta, zeta> = 0
whenever the new rigging must stay null.  Every right-hand side here is
assembled from base-rigging data only; identity_residuals compares that
against a from-scratch frame build with the new rigging, which makes the
two computation paths genuinely independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import exprlang, numerics
from .hypersurface import FrameField, GeometryError, ParamRigging

__all__ = [
    "ZeroPhiError",
    "InadmissibleZetaError",
    "RiggingChange",
    "make_change",
    "transformed_quantities",
    "identity_residuals",
    "seeded_changes",
]


class ZeroPhiError(GeometryError):
    """phi vanishes (or nearly) somewhere on the patch."""


class InadmissibleZetaError(GeometryError):
    """No screen rescaling of zeta can keep the new rigging null."""


PHI_FLOOR = 1e-12


def _as_scalar_field(phi, chart) -> Callable:
    if callable(phi):
        return phi
    if isinstance(phi, str):
        e = exprlang.parse(phi, chart)
        return lambda u: float(e(*u))
    val = float(phi)
    return lambda u: val


def _as_vector_field(zeta, chart, m: int) -> Callable:
    if zeta is None:
        zero = np.zeros(m)
        return lambda u: zero
    if callable(zeta):
        return lambda u: np.asarray(zeta(u), dtype=float)
    comps = [exprlang.parse(s, chart) if isinstance(s, str) else None for s in zeta]
    vals = [None if c is not None else float(z) for c, z in zip(comps, zeta)]

    def fn(u):
        out = np.empty(m)
        for i in range(m):
            out[i] = float(comps[i](*u)) if comps[i] is not None else vals[i]
        return out

    return fn


@dataclass
class RiggingChange:
    """A validated change of rigging over a frame field."""

    base: FrameField
    phi_fn: Callable
    zeta_fn: Callable          # admissible parameter components
    null_target: bool = True
    name: str = "change"
    _new_field: FrameField | None = field(default=None, repr=False)

    @property
    def patch(self):
        return self.base.patch

    def phi(self, u) -> float:
        return float(self.phi_fn(np.asarray(u, dtype=float)))

    def dphi(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.array([
            numerics.central_diff(
                lambda v: self.phi_fn(v), u, a, numerics.step_exact(u[a])
            )
            for a in range(self.patch.nparams)
        ])

    def zeta(self, u) -> np.ndarray:
        return np.asarray(self.zeta_fn(np.asarray(u, dtype=float)), dtype=float)

    def zeta_amb(self, u) -> np.ndarray:
        fp = self.base.frame(u)
        return fp.J @ self.zeta(u)

    def admissibility_defect(self, u) -> float:
        fp = self.base.frame(u)
        z = self.zeta(u)
        return float(abs(
            2.0 * self.phi(u) * (fp.eta_param @ z) + z @ fp.g_param @ z
        ))

    def new_rigging(self) -> ParamRigging:
        def fn(u):
            fp = self.base.frame(u)
            return self.phi(u) * fp.N_amb + fp.J @ self.zeta(u)

        return ParamRigging(fn, name=self.name)

    def new_field(self) -> FrameField:
        if self._new_field is None:
            self._new_field = FrameField(
                self.patch, self.new_rigging(), tol=self.base.tol
            )
        return self._new_field


def make_change(base: FrameField, phi, zeta=None, null: bool = True,
                name: str = "change") -> RiggingChange:
    """Validate (and if needed repair) a change of rigging.

    phi and the zeta components may be numbers, exprlang strings over the
    parameter chart, or callables on parameter points.  When the new
    rigging must be null and zeta breaks the admissibility constraint,
    the screen part of zeta is rescaled by the root of the scalar
    quadratic 2 phi eta(zeta) + t^2 |P zeta|^2 = 0; if no real root
    exists the change is rejected.
    """
    chart = base.patch.chart
    m = base.patch.nparams
    phi_fn = _as_scalar_field(phi, chart)
    zeta_raw = _as_vector_field(zeta, chart, m)

    probe = base.sample_points(3)
    for u in probe:
        if abs(float(phi_fn(u))) < PHI_FLOOR:
            raise ZeroPhiError(f"{name}: phi vanishes at u={list(u)}")

    if not null:
        return RiggingChange(base, phi_fn, zeta_raw, False, name)

    def admissible(u):
        z = zeta_raw(np.asarray(u, dtype=float))
        if not z.any():
            return z
        fp = base.frame(u)
        alpha = float(fp.eta_param @ z)
        w = z - alpha * fp.xi_param
        nrm2 = float(w @ fp.g_param @ w)
        ph = float(phi_fn(u))
        if nrm2 < 1e-24:
            if abs(alpha) < 1e-12:
                return np.zeros_like(z)
            raise InadmissibleZetaError(
                f"{name}: zeta has no screen part to rescale at u={list(u)}"
            )
        t2 = -2.0 * ph * alpha / nrm2
        if t2 < 1e-20:
            raise InadmissibleZetaError(
                f"{name}: 2 phi eta(zeta) = {2 * ph * alpha:.3e} cannot be "
                f"balanced by a screen rescale at u={list(u)}"
            )
        return alpha * fp.xi_param + np.sqrt(t2) * w

    change = RiggingChange(base, phi_fn, admissible, True, name)
    for u in probe:
        defect = change.admissibility_defect(u)
        if defect > 1e-8:
            raise InadmissibleZetaError(
                f"{name}: residual admissibility defect {defect:.3e} at u={list(u)}"
            )
    return change


def transformed_quantities(change: RiggingChange, u) -> dict:
    """Right-hand sides of the transformation identities, from base data."""
    base = change.base
    u = np.asarray(u, dtype=float)
    sp = base.shape(u)
    fp = sp.frame
    m = base.patch.nparams

    ph = change.phi(u)
    dph = change.dphi(u)
    z = change.zeta(u)
    gz = fp.g_param @ z
    Bz = sp.B_param @ z

    gamma = base.induced_connection(u)
    dz = np.stack([
        numerics.central_diff(change.zeta_fn, u, a, numerics.step_exact(u[a]))
        for a in range(m)
    ])  # dz[a, c] = d_a zeta^c
    conn_zeta = dz.T + np.einsum("cab,b->ca", gamma, z)  # (nabla_a zeta)^c

    tau_new = sp.tau_param + dph / ph + Bz / ph
    P = np.eye(m) - np.outer(fp.xi_param, fp.eta_param)
    return {
        "xi_param": fp.xi_param / ph,
        "xi_amb": fp.xi_amb / ph,
        "admissibility": change.admissibility_defect(u),
        "B_param": sp.B_param / ph,
        "P": P - np.outer(fp.xi_param, gz) / ph,
        "gamma": gamma - np.einsum("ab,c->cab", sp.B_param, z) / ph,
        "tau_param": tau_new,
        "A_xi_param": sp.A_xi_param / ph - np.outer(fp.xi_param, Bz) / ph**2,
        "A_N_param": ph * sp.A_N_param - conn_zeta + np.outer(z, tau_new),
        "star_S1": sp.star_S1 / ph,
    }


def identity_residuals(change: RiggingChange, u) -> dict:
    """Max-norm gap, per identity, between the predicted transformation
    and a from-scratch frame build with the new rigging."""
    pred = transformed_quantities(change, u)
    ff2 = change.new_field()
    sp2 = ff2.shape(u)
    fp2 = sp2.frame
    m = change.patch.nparams

    P2 = np.eye(m) - np.outer(fp2.xi_param, fp2.eta_param)
    gamma2 = ff2.induced_connection(u)
    return {
        "i1_xi": float(np.max(np.abs(fp2.xi_amb - pred["xi_amb"]))),
        "i2_admissible": pred["admissibility"],
        "i3_B": float(np.max(np.abs(sp2.B_param - pred["B_param"]))),
        "i4_P": float(np.max(np.abs(P2 - pred["P"]))),
        "i5_conn": float(np.max(np.abs(gamma2 - pred["gamma"]))),
        "i6_tau": float(np.max(np.abs(sp2.tau_param - pred["tau_param"]))),
        "i7_A_xi": float(np.max(np.abs(sp2.A_xi_param - pred["A_xi_param"]))),
        "i8_A_N": float(np.max(np.abs(sp2.A_N_param - pred["A_N_param"]))),
    }


def seeded_changes(base: FrameField, count: int = 3, seed: int = 7) -> list:
    """Reproducible admissible changes: smooth positive phi plus a zeta
    built from fixed screen coefficients, with the xi component chosen
    pointwise so the admissibility constraint holds exactly."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        a = float(rng.uniform(0.6, 1.8))
        b = float(rng.uniform(-0.25, 0.25))
        wave = rng.standard_normal(base.patch.nparams)
        wave /= max(1.0, float(np.max(np.abs(wave))))

        def phi_fn(u, a=a, b=b, wave=wave):
            return a + b * np.sin(float(wave @ u))

        nscreen = base.frame(base.patch.interior_point()).nscreen
        coeff = rng.uniform(-0.4, 0.4, size=nscreen)

        def zeta_fn(u, coeff=coeff, phi_fn=phi_fn):
            fp = base.frame(u)
            w = coeff @ fp.screen_param
            nrm2 = float(w @ fp.g_param @ w)
            alpha = -nrm2 / (2.0 * phi_fn(u))
            return alpha * fp.xi_param + w

        out.append(
            make_change(base, phi_fn, zeta_fn, null=True, name=f"seeded[{k}]")
        )
    return out
