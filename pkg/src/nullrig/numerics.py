"""Finite differencing, Richardson extrapolation, RK4 flows, quadrature.

Step-size policy, used consistently across the package:

* fields that are exact to machine precision (embeddings, metric
  components, frames rebuilt from scratch at the evaluation point) are
  differenced with h = eps^(1/3) * (1 + |coordinate|), the optimum for
  central differences under pure roundoff;
* fields that already carry ~1e-10 finite-difference noise (tau, shape
  operators, expansions, anything one derivative deep) use a much larger
  h = 5e-4 * (1 + |coordinate|) so the noise term h^-1 * noise stays
  below the truncation term.

Quadrature over compact leaves uses Gauss-Legendre nodes on closed axes
(interior nodes, so coordinate poles are never sampled) and the uniform
midpoint rule on periodic axes (spectrally accurate for smooth periodic
integrands).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

EPS = float(np.finfo(float).eps)
STEP_EXACT_BASE = EPS ** (1.0 / 3.0)  # ~6.06e-6
STEP_NOISY_BASE = 5e-4


def step_exact(coord: float) -> float:
    return STEP_EXACT_BASE * (1.0 + abs(float(coord)))

def step_noisy(coord: float) -> float:
    return STEP_NOISY_BASE * (1.0 + abs(float(coord)))


def central_diff(f: Callable, x: np.ndarray, axis: int, h: float):
    """(f(x + h e_axis) - f(x - h e_axis)) / 2h for array-valued f."""
    xp = np.array(x, dtype=float)
    xm = np.array(x, dtype=float)
    xp[axis] += h
    xm[axis] -= h
    fp = np.asarray(f(xp), dtype=float)
    fm = np.asarray(f(xm), dtype=float)
    return (fp - fm) / (2.0 * h)


def central_diff_richardson(f: Callable, x: np.ndarray, axis: int, h: float):
    """Fourth-order derivative estimate: one Richardson level on top of
    the central difference."""
    d1 = central_diff(f, x, axis, h)
    d2 = central_diff(f, x, axis, 0.5 * h)
    return (4.0 * d2 - d1) / 3.0


def directional_diff(f: Callable, x: np.ndarray, v: np.ndarray, h: float):
    """Derivative of f along the (unnormalized) direction v."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    scale = float(np.max(np.abs(v)))
    if scale == 0.0:
        raise ValueError("zero direction")
    step = h / scale
    fp = np.asarray(f(x + step * v), dtype=float)
    fm = np.asarray(f(x - step * v), dtype=float)
    return (fp - fm) / (2.0 * step)


def rk4_flow(field: Callable, x0: np.ndarray, t: float, nsteps: int) -> np.ndarray:
    """Integrate dx/ds = field(x) for time t with fixed-step classical RK4.

    x0 is a batch (..., d); field must accept and return the same shape.
    Deterministic: no adaptivity, no tolerance knobs.
    """
    x = np.array(x0, dtype=float)
    h = t / nsteps
    for _ in range(nsteps):
        k1 = field(x)
        k2 = field(x + 0.5 * h * k1)
        k3 = field(x + 0.5 * h * k2)
        k4 = field(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return x


def flow_steps(eps: float, minimum: int = 64, max_step: float = 2e-4) -> int:
    """Step count for a drag by eps: at least `minimum`, step <= max_step."""
    if eps == 0.0:
        return minimum
    return max(minimum, int(math.ceil(abs(eps) / max_step)))


# ---- quadrature ------------------------------------------------------------


@dataclass(frozen=True)
class AxisQuadrature:
    nodes: np.ndarray
    weights: np.ndarray


def axis_quadrature(lo: float, hi: float, n: int, periodic: bool) -> AxisQuadrature:
    if n < 2:
        raise ValueError("need at least 2 quadrature nodes per axis")
    if periodic:
        h = (hi - lo) / n
        nodes = lo + h * (np.arange(n) + 0.5)
        weights = np.full(n, h)
    else:
        x, w = np.polynomial.legendre.leggauss(n)
        nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        weights = 0.5 * (hi - lo) * w
    return AxisQuadrature(nodes, weights)


def product_quadrature(axes: Sequence[AxisQuadrature]):
    """Tensor-product nodes (K, naxes) and weights (K,)."""
    grids = np.meshgrid(*[a.nodes for a in axes], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    w = axes[0].weights
    for a in axes[1:]:
        w = np.multiply.outer(w, a.weights)
    return nodes, w.ravel()
