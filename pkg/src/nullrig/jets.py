"""Second-order forward-mode jets.

A :class:`Jet2` carries the value, gradient and Hessian of a scalar with
respect to a fixed tuple of m seed variables.  Arithmetic propagates all
three slots exactly (to roundoff), which is what the geometry layer needs:
embeddings and metric components get machine-precision first and second
derivatives with no grid, no step size and no symbolic algebra.

Only scalars are lifted.  Vector-valued fields are evaluated
component-wise (see :func:`lift_and_evaluate`).
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Jet2",
    "JetDomainError",
    "seed",
    "constant",
    "lift_and_evaluate",
    "directional_second_derivative",
    "sqrt",
    "exp",
    "ln",
    "sin",
    "cos",
]


class JetDomainError(ArithmeticError):
    """A lifted function left its real domain (sqrt of a negative number,
    ln of a nonpositive one, division by zero, 0^negative...)."""


class Jet2:
    """Truncated second-order Taylor data of a scalar in m variables."""

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad, hess):
        self.value = float(value)
        self.grad = np.asarray(grad, dtype=float)
        h = np.asarray(hess, dtype=float)
        if self.grad.ndim != 1 or h.shape != (self.grad.size, self.grad.size):
            raise ValueError("jet slots must be (m,) and (m, m)")
        # stored symmetrically, always
        self.hess = 0.5 * (h + h.T)

    # internal fast path: trusts shapes, still symmetrizes
    @classmethod
    def _new(cls, value: float, grad: np.ndarray, hess: np.ndarray) -> "Jet2":
        j = object.__new__(cls)
        j.value = value
        j.grad = grad
        j.hess = 0.5 * (hess + hess.T)
        return j

    @property
    def nvars(self) -> int:
        return self.grad.size

    def __repr__(self) -> str:
        return f"Jet2({self.value!r}, grad={self.grad!r})"

    # ---- ring operations -------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet2):
            if other.nvars != self.nvars:
                raise ValueError("mixed seed spaces")
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return constant(float(other), self.nvars)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet2._new(self.value + o.value, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2._new(-self.value, -self.grad, -self.hess)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Jet2._new(self.value - o.value, self.grad - o.grad, self.hess - o.hess)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        g = self.grad * o.value + o.grad * self.value
        h = (
            self.hess * o.value
            + o.hess * self.value
            + np.outer(self.grad, o.grad)
            + np.outer(o.grad, self.grad)
        )
        return Jet2._new(self.value * o.value, g, h)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.value == 0.0:
            raise JetDomainError("division by zero")
        return self * o._reciprocal()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def _reciprocal(self) -> "Jet2":
        if self.value == 0.0:
            raise JetDomainError("division by zero")
        w = 1.0 / self.value
        g = -w * w * self.grad
        h = -w * w * self.hess + 2.0 * w ** 3 * np.outer(self.grad, self.grad)
        return Jet2._new(w, g, h)

    def __pow__(self, p):
        if isinstance(p, Jet2):
            # u^v = exp(v ln u); needs positive base
            return exp(p * ln(self))
        p = float(p)
        if p == 0.0:
            return constant(1.0, self.nvars)
        if p == 1.0:
            return Jet2._new(self.value, self.grad.copy(), self.hess.copy())
        u = self.value
        if p == int(p):
            k = int(p)
            if u == 0.0 and k < 0:
                raise JetDomainError("0 raised to a negative power")
            v = u ** k
            d1 = k * u ** (k - 1) if (u != 0.0 or k >= 1) else 0.0
            d2 = k * (k - 1) * u ** (k - 2) if (u != 0.0 or k >= 2) else 0.0
        else:
            if u <= 0.0:
                raise JetDomainError(f"{u!r} raised to non-integer power {p!r}")
            v = u ** p
            d1 = p * u ** (p - 1.0)
            d2 = p * (p - 1.0) * u ** (p - 2.0)
        return self._chain(v, d1, d2)

    def __rpow__(self, base):
        base = float(base)
        if base <= 0.0:
            raise JetDomainError("non-positive base for exponentiation by a jet")
        return exp(self * math.log(base))

    def _chain(self, v: float, d1: float, d2: float) -> "Jet2":
        """Compose with a scalar function given f(u), f'(u), f''(u)."""
        g = d1 * self.grad
        h = d1 * self.hess + d2 * np.outer(self.grad, self.grad)
        return Jet2._new(v, g, h)

    def __eq__(self, other):
        if isinstance(other, Jet2):
            return (
                self.value == other.value
                and np.array_equal(self.grad, other.grad)
                and np.array_equal(self.hess, other.hess)
            )
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.grad.tobytes(), self.hess.tobytes()))


def constant(value: float, nvars: int) -> Jet2:
    return Jet2._new(float(value), np.zeros(nvars), np.zeros((nvars, nvars)))


def seed(x: Sequence[float]) -> list[Jet2]:
    """Jet variables for a point x: value x[i], gradient e_i, zero Hessian."""
    x = np.asarray(x, dtype=float)
    m = x.size
    out = []
    for i in range(m):
        g = np.zeros(m)
        g[i] = 1.0
        out.append(Jet2._new(float(x[i]), g, np.zeros((m, m))))
    return out


def lift_and_evaluate(f: Callable, x: Sequence[float]) -> Jet2:
    """Evaluate a scalar field f(u_1, ..., u_m) on jet variables at x.

    f receives the seeded jets as positional arguments and may return a
    Jet2 or a plain number (a constant field).
    """
    x = np.asarray(x, dtype=float)
    out = f(*seed(x))
    if isinstance(out, Jet2):
        if out.nvars != x.size:
            raise ValueError("field changed the seed space")
        return out
    return constant(float(out), x.size)


def directional_second_derivative(f: Callable, x, u, v) -> float:
    """u^T Hess(f)(x) v, exactly (no finite differencing)."""
    j = lift_and_evaluate(f, x)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(u @ j.hess @ v)


# ---- lifted elementary functions ------------------------------------------
#
# Each dispatcher accepts a Jet2, a numpy array (elementwise, used by the
# vectorized flow integrators) or a plain number.  Domain checks raise
# JetDomainError uniformly so expression evaluation can attach source spans.


def _is_number(x) -> bool:
    return isinstance(x, (int, float, np.floating, np.integer))


def sqrt(x):
    if isinstance(x, Jet2):
        if x.value <= 0.0:
            raise JetDomainError(f"sqrt of non-positive value {x.value!r}")
        v = math.sqrt(x.value)
        return x._chain(v, 0.5 / v, -0.25 / (v * x.value))
    if isinstance(x, np.ndarray):
        if np.any(x < 0.0):
            raise JetDomainError("sqrt of negative value")
        return np.sqrt(x)
    if _is_number(x):
        if x < 0.0:
            raise JetDomainError(f"sqrt of negative value {x!r}")
        return math.sqrt(x)
    raise TypeError(f"sqrt of {type(x).__name__}")


def exp(x):
    if isinstance(x, Jet2):
        v = math.exp(x.value)
        return x._chain(v, v, v)
    if isinstance(x, np.ndarray):
        return np.exp(x)
    if _is_number(x):
        return math.exp(x)
    raise TypeError(f"exp of {type(x).__name__}")


def ln(x):
    if isinstance(x, Jet2):
        if x.value <= 0.0:
            raise JetDomainError(f"ln of non-positive value {x.value!r}")
        u = x.value
        return x._chain(math.log(u), 1.0 / u, -1.0 / (u * u))
    if isinstance(x, np.ndarray):
        if np.any(x <= 0.0):
            raise JetDomainError("ln of non-positive value")
        return np.log(x)
    if _is_number(x):
        if x <= 0.0:
            raise JetDomainError(f"ln of non-positive value {x!r}")
        return math.log(x)
    raise TypeError(f"ln of {type(x).__name__}")


def sin(x):
    if isinstance(x, Jet2):
        return x._chain(math.sin(x.value), math.cos(x.value), -math.sin(x.value))
    if isinstance(x, np.ndarray):
        return np.sin(x)
    if _is_number(x):
        return math.sin(x)
    raise TypeError(f"sin of {type(x).__name__}")


def cos(x):
    if isinstance(x, Jet2):
        return x._chain(math.cos(x.value), -math.sin(x.value), -math.cos(x.value))
    if isinstance(x, np.ndarray):
        return np.cos(x)
    if _is_number(x):
        return math.cos(x)
    raise TypeError(f"cos of {type(x).__name__}")


def power(x, y):
    """Dispatcher for '^' covering jets, arrays and numbers."""
    if isinstance(x, Jet2) or isinstance(y, Jet2):
        if not isinstance(x, Jet2):
            x = constant(float(x), y.nvars)
        return x ** y
    if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
        yf = y
        if _is_number(y) and float(y) == int(float(y)):
            base = np.asarray(x, dtype=float)
            k = int(float(y))
            if k < 0 and np.any(base == 0.0):
                raise JetDomainError("0 raised to a negative power")
            return base ** k
        base = np.asarray(x, dtype=float)
        if np.any(base < 0.0):
            raise JetDomainError("negative base for non-integer power")
        return base ** yf
    xf, yf = float(x), float(y)
    if yf == int(yf):
        if xf == 0.0 and yf < 0:
            raise JetDomainError("0 raised to a negative power")
        return xf ** int(yf)
    if xf < 0.0:
        raise JetDomainError(f"negative base {xf!r} for non-integer power {yf!r}")
    return xf ** yf


def divide(x, y):
    """Dispatcher for '/' with a uniform zero-divisor error."""
    if isinstance(y, Jet2) or isinstance(x, Jet2):
        if not isinstance(x, Jet2):
            x = constant(float(x), y.nvars)
        return x / y
    if isinstance(y, np.ndarray):
        if np.any(y == 0.0):
            raise JetDomainError("division by zero")
        return x / y
    if float(y) == 0.0:
        raise JetDomainError("division by zero")
    return x / y
