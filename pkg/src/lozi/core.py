"""The orientation-preserving Lozi family f(x, y) = (1 + y - a|x|, b x).

Everything in this module is a pure function of the parameters.  Points are
plain ``numpy`` arrays of shape ``(2,)`` (or ``(n, 2)`` where noted).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

SQRT2 = math.sqrt(2.0)


class LoziError(ValueError):
    """Raised when an operation is undefined for the given parameters."""


@dataclass(frozen=True)
class Params:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise LoziError(f"parameters must be finite, got ({self.a}, {self.b})")

    @property
    def discriminant(self) -> float:
        return self.a * self.a + 4.0 * self.b

    def as_tuple(self):
        return (self.a, self.b)


@dataclass(frozen=True)
class Spectra:
    alpha: float
    beta: float


@dataclass(frozen=True)
class FixedPoints:
    X: np.ndarray
    Y: np.ndarray


@dataclass(frozen=True)
class ConditionReport:
    """Parameter conditions C1..C6.

    ``c4`` is always ``None``: the condition list has no fourth entry with
    content (its labels skip from C3 to C5).
    """
    c1: bool
    c2: bool
    c3: bool
    c4: Optional[bool]
    c5: bool
    c6: bool
    p1: float
    p2: float
    p3: Optional[float]
    p4: float
    in_U_minus: bool

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


# -- the map -----------------------------------------------------------------

def apply(p: Params, z) -> np.ndarray:
    """Forward map; works on a single point or an ``(n, 2)`` array."""
    z = np.asarray(z, dtype=float)
    x, y = z[..., 0], z[..., 1]
    return np.stack([1.0 + y - p.a * np.abs(x), p.b * x], axis=-1)


def apply_inverse(p: Params, z) -> np.ndarray:
    if p.b == 0:
        raise LoziError("degenerate family, not invertible (b = 0)")
    z = np.asarray(z, dtype=float)
    u, v = z[..., 0], z[..., 1]
    x = v / p.b
    return np.stack([x, u - 1.0 + p.a * np.abs(x)], axis=-1)


def iterate(p: Params, z, n: int) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    for _ in range(n):
        z = apply(p, z)
    return z


def orbit(p: Params, z, n: int) -> np.ndarray:
    """Return ``n + 1`` points z, f(z), ..., f^n(z)."""
    out = np.empty((n + 1, 2))
    out[0] = z
    a, b = p.a, p.b
    x, y = float(out[0, 0]), float(out[0, 1])
    for i in range(1, n + 1):
        x, y = 1.0 + y - a * abs(x), b * x
        out[i, 0] = x
        out[i, 1] = y
    return out


# -- linear data -------------------------------------------------------------

def spectra(p: Params) -> Spectra:
    d = p.discriminant
    if d < 0:
        raise LoziError("complex eigenvalues, outside C1 closure (a^2 + 4b < 0)")
    s = math.sqrt(d)
    beta = 0.5 * (p.a + s)
    # alpha = -b / beta avoids cancellation when b is small
    alpha = -p.b / beta if beta != 0 else 0.5 * (p.a - s)
    return Spectra(alpha=alpha, beta=beta)


def eigenvector(p: Params, lam: float) -> np.ndarray:
    """Eigenvector (lam, b) for an eigenvalue lam of the branch containing it."""
    return np.array([lam, p.b])


def fixed_points(p: Params) -> FixedPoints:
    d1 = 1.0 + p.a - p.b
    d2 = p.a + p.b - 1.0
    if d1 == 0 or d2 == 0:
        raise LoziError("fixed point at infinity")
    return FixedPoints(
        X=np.array([1.0 / d1, p.b / d1]),
        Y=np.array([-1.0 / d2, -p.b / d2]),
    )


def jacobian_branch(p: Params, side: str) -> np.ndarray:
    """Derivative of f on the half-plane ``side`` ('right' is x > 0)."""
    if side in ("right", "+", 1):
        sigma = 1.0
    elif side in ("left", "-", -1):
        sigma = -1.0
    else:
        raise LoziError(f"side must be 'left' or 'right', got {side!r}")
    return np.array([[-sigma * p.a, 1.0], [p.b, 0.0]])


def branch_affine(p: Params, sigma: int):
    """Return (M, c) with f(z) = M z + c on the half-plane sign(x) = sigma."""
    return np.array([[-sigma * p.a, 1.0], [p.b, 0.0]]), np.array([1.0, 0.0])


# -- parameter conditions ----------------------------------------------------

def p1(a: float) -> float:
    return 1.0 - a


def p2(a: float) -> float:
    return (1.0 - 2.0 * a) / 4.0


def p3(a: float) -> Optional[float]:
    disc = 9.0 * a ** 4 - 16.0 * a ** 3
    if disc < 0:
        return None
    return (3.0 * a * a - 8.0 * a + math.sqrt(disc)) / 8.0


def p4(a: float) -> float:
    return 2.0 - SQRT2 * a


def _max_defined(*vals) -> float:
    return max(v for v in vals if v is not None)


def check_conditions(p: Params) -> ConditionReport:
    a, b = p.a, p.b
    v1, v2, v3, v4 = p1(a), p2(a), p3(a), p4(a)
    c1 = (1 < a <= 2) and (-1 < b < 0) and (a + b > 1)
    c2 = (1 < a <= 2) and (max(v1, v2) < b <= 0)
    c3 = (1 < a < 2) and (_max_defined(v1, v2, v3) < b < 0)
    c5 = (SQRT2 < a < 2) and (v4 < b < 0)
    c6 = (SQRT2 < a < 2) and (_max_defined(v3, v4) < b < 0)
    return ConditionReport(c1=c1, c2=c2, c3=c3, c4=None, c5=c5, c6=c6,
                           p1=v1, p2=v2, p3=v3, p4=v4, in_U_minus=c6)


def substitute_r(a: float, r: float) -> float:
    """b_a(r) = (r^2 - 2 r a) / 4 for 0 <= r <= a."""
    if not (0.0 <= r <= a):
        raise LoziError(f"r = {r} outside [0, a] for a = {a}")
    return (r * r - 2.0 * r * a) / 4.0


def unsubstitute_r(a: float, b: float) -> float:
    d = a * a + 4.0 * b
    if d < 0:
        raise LoziError("a^2 + 4b < 0: no real r")
    return a - math.sqrt(d)
