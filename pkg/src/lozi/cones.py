"""Invariant cone fields and the hyperbolicity constants of the Lozi map.

Stable cones are {(t, r) : |t| <= |r| / beta} and unstable cones
{(t, r) : |r| <= alpha |t|}; both are the same at every point.  Df maps
unstable cones into unstable cones expanding by at least beta, and Df^-1 maps
stable cones into stable cones expanding by at least 1 / alpha.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import LoziError, Params, apply, apply_inverse, fixed_points, spectra
from .geometry import ConvexPolygon, HalfPlane, diameter

CONE_SLACK = 1e-12
MAX_DEPTH = 60


def _jac(p: Params, z) -> np.ndarray:
    x = float(z[0])
    if x == 0:
        raise LoziError("map not differentiable here (x = 0)")
    s = 1.0 if x > 0 else -1.0
    return np.array([[-s * p.a, 1.0], [p.b, 0.0]])


@dataclass(frozen=True)
class ConeField:
    kind: str      # "stable" or "unstable"
    params: Params

    def slack(self, v) -> float:
        """Signed slack of the cone inequality; nonnegative means inside."""
        t, r = float(v[0]), float(v[1])
        sp = spectra(self.params)
        if self.kind == "unstable":
            return sp.alpha * abs(t) - abs(r)
        return abs(r) / sp.beta - abs(t)

    def contains(self, v, slack: float = CONE_SLACK) -> bool:
        return self.slack(v) >= -slack * float(np.hypot(v[0], v[1]))

    def contains_many(self, V, slack: float = CONE_SLACK) -> np.ndarray:
        V = np.asarray(V, dtype=float)
        sp = spectra(self.params)
        t, r = np.abs(V[:, 0]), np.abs(V[:, 1])
        s = sp.alpha * t - r if self.kind == "unstable" else r / sp.beta - t
        return s >= -slack * np.hypot(V[:, 0], V[:, 1])

    def boundary(self) -> np.ndarray:
        """Two unit boundary directions of the (double) cone."""
        sp = spectra(self.params)
        if self.kind == "unstable":
            u = np.array([[1.0, sp.alpha], [1.0, -sp.alpha]])
        else:
            u = np.array([[1.0 / sp.beta, 1.0], [-1.0 / sp.beta, 1.0]])
        return u / np.hypot(u[:, 0], u[:, 1])[:, None]


@dataclass
class ConeMapReport:
    in_cone_before: bool
    in_cone_after: bool
    expansion: float
    componentwise: bool   # |t'| >= k|t| and |r'| >= k|r| for the relevant factor k


def cone_map_check(p: Params, z, v, kind: str = "unstable") -> ConeMapReport:
    """Push ``v`` through Df_z (unstable) or pull it back through Df^-1 (stable).

    For the stable kind ``v`` is a tangent vector at f(z) and the result lives
    at z.
    """
    J = _jac(p, z)
    sp = spectra(p)
    cone = ConeField(kind, p)
    v = np.asarray(v, dtype=float)
    if kind == "unstable":
        w = J @ v
        k = sp.beta
    elif kind == "stable":
        w = np.linalg.solve(J, v)
        k = 1.0 / sp.alpha
    else:
        raise LoziError(f"kind must be 'stable' or 'unstable', got {kind!r}")
    exp = float(np.hypot(*w) / np.hypot(*v))
    tol = 1e-10
    comp = (abs(w[0]) >= k * abs(v[0]) * (1 - tol)) and (abs(w[1]) >= k * abs(v[1]) * (1 - tol))
    return ConeMapReport(cone.contains(v), cone.contains(w), exp, comp)


def cone_suite(p: Params, n: int, seed: int = 0, box: float = 3.0) -> dict:
    """Monte Carlo version of the cone lemma at one parameter.

    Returns the minimal expansion ratios (unstable: |Df v| / |v|, stable:
    |Df^-1 v| / |v|) and the number of cone-membership violations.
    """
    rng = np.random.default_rng(seed)
    sp = spectra(p)
    z = rng.uniform(-box, box, size=(n, 2))
    sig = np.where(z[:, 0] >= 0, 1.0, -1.0)
    # random vectors in each cone: pick the slope uniformly inside the cone
    t = rng.choice([-1.0, 1.0], size=n)
    vu = np.column_stack([t, t * rng.uniform(-sp.alpha, sp.alpha, size=n)])
    r = rng.choice([-1.0, 1.0], size=n)
    vs = np.column_stack([r * rng.uniform(-1.0 / sp.beta, 1.0 / sp.beta, size=n), r])
    # Df = [[-s a, 1], [b, 0]],  Df^-1 = [[0, 1/b], [1, s a / b]]
    wu = np.column_stack([-sig * p.a * vu[:, 0] + vu[:, 1], p.b * vu[:, 0]])
    ws = np.column_stack([vs[:, 1] / p.b, vs[:, 0] + sig * p.a * vs[:, 1] / p.b])
    cu, cs = ConeField("unstable", p), ConeField("stable", p)
    exp_u = np.hypot(*wu.T) / np.hypot(*vu.T)
    exp_s = np.hypot(*ws.T) / np.hypot(*vs.T)
    viol = int((~cu.contains_many(vu)).sum() + (~cu.contains_many(wu)).sum()
               + (~cs.contains_many(vs)).sum() + (~cs.contains_many(ws)).sum())
    return {"min_expansion_unstable": float(exp_u.min()),
            "min_expansion_stable": float(exp_s.min()),
            "beta": sp.beta, "inv_alpha": 1.0 / sp.alpha, "violations": viol}


# -- directions --------------------------------------------------------------

@dataclass
class DirectionEstimate:
    base: np.ndarray
    direction: np.ndarray
    kind: str
    depth: int
    width: float
    truncated: bool = False


def _angle_between_lines(u, v) -> float:
    cr = abs(u[0] * v[1] - u[1] * v[0])
    dt = abs(u[0] * v[0] + u[1] * v[1])
    return math.atan2(cr, dt)


def _bisector(u, v) -> np.ndarray:
    if u @ v < 0:
        v = -v
    w = u + v
    w = w / np.hypot(*w)
    # canonical sign: first nonzero coordinate positive
    if w[0] < 0 or (w[0] == 0 and w[1] < 0):
        w = -w
    return w


def estimate_direction(p: Params, z, kind: str, depth: int = 30,
                       axis_tol: float = 1e-12) -> DirectionEstimate:
    """Approximate E^s_z or E^u_z by nested images of cones.

    Stable: the stable cone at f^depth(z) pulled back to z.  Unstable: the
    unstable cone at f^-depth(z) pushed forward to z.  If the orbit comes
    within ``axis_tol`` of the non-smooth axis the depth is cut there.
    """
    depth = min(int(depth), MAX_DEPTH)
    z = np.asarray(z, dtype=float)
    cone = ConeField(kind, p).boundary()
    u1, u2 = cone[0].copy(), cone[1].copy()
    truncated = False
    if kind == "stable":
        pts = [z]
        for _ in range(depth):
            if abs(pts[-1][0]) <= axis_tol:
                truncated = True
                break
            pts.append(apply(p, pts[-1]))
        used = len(pts) - 1
        for k in range(used - 1, -1, -1):
            J = _jac(p, pts[k])
            u1 = np.linalg.solve(J, u1)
            u2 = np.linalg.solve(J, u2)
            u1 /= np.hypot(*u1)
            u2 /= np.hypot(*u2)
    elif kind == "unstable":
        pts = [z]
        for _ in range(depth):
            if abs(pts[-1][1]) <= axis_tol:
                truncated = True
                break
            pts.append(apply_inverse(p, pts[-1]))
        used = len(pts) - 1
        for k in range(used, 0, -1):
            J = _jac(p, pts[k])
            u1 = J @ u1
            u2 = J @ u2
            u1 /= np.hypot(*u1)
            u2 /= np.hypot(*u2)
    else:
        raise LoziError(f"kind must be 'stable' or 'unstable', got {kind!r}")
    return DirectionEstimate(z, _bisector(u1, u2), kind, used,
                             _angle_between_lines(u1, u2), truncated)


def push_unstable_direction(p: Params, z0, steps: int):
    """Forward orbit of ``z0`` carrying a vector of the unstable cone.

    Returns (f^steps(z0), unit vector).  This uses only forward iterates, so it
    stays accurate where backward orbits are numerically unusable.
    """
    z = np.asarray(z0, dtype=float)
    v = np.array([1.0, 0.0])
    for _ in range(steps):
        if z[0] == 0:
            z = z + np.array([1e-15, 0.0])
        v = _jac(p, z) @ v
        v /= np.hypot(*v)
        z = apply(p, z)
    return z, v


# -- local manifolds ---------------------------------------------------------

def local_manifold_predicate(p: Params, z, theta: float, horizon: int,
                             kind: str = "stable") -> bool:
    """Check the distance-to-axis inequalities that certify a local manifold.

    stable:   |f^n(z)_x| >= theta * alpha^n      for n = 0..horizon
    unstable: |f^-n(z)_y| >= theta / beta^n      for n = 0..horizon
    """
    if theta <= 0:
        raise LoziError("theta must be positive")
    return bool(np.all(_axis_distances(p, z, horizon, kind) >= theta * _rates(p, horizon, kind)))


def _rates(p: Params, horizon: int, kind: str) -> np.ndarray:
    sp = spectra(p)
    n = np.arange(horizon + 1)
    return sp.alpha ** n if kind == "stable" else sp.beta ** (-n)


def _axis_distances(p: Params, z, horizon: int, kind: str) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    out = np.empty(horizon + 1)
    for n in range(horizon + 1):
        if kind == "stable":
            out[n] = abs(z[0])
            z = apply(p, z)
        elif kind == "unstable":
            out[n] = abs(z[1])
            z = apply_inverse(p, z)
        else:
            raise LoziError(f"kind must be 'stable' or 'unstable', got {kind!r}")
    return out


def largest_certified_theta(p: Params, z, horizon: int, kind: str = "stable",
                            iterations: int = 40) -> float:
    """Bisection for the largest theta accepted by the predicate up to ``horizon``."""
    hi = max(float(_axis_distances(p, z, 0, kind)[0]), 1e-300)
    if not local_manifold_predicate(p, z, 1e-300, horizon, kind):
        return 0.0
    lo = 0.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid > 0 and local_manifold_predicate(p, z, mid, horizon, kind):
            lo = mid
        else:
            hi = mid
    return lo


# -- the region K ------------------------------------------------------------

def k_region(p: Params) -> HalfPlane:
    """K = {(x, y) : y - Y_y + beta (x - Y_x) >= 0}."""
    Y = fixed_points(p).Y
    be = spectra(p).beta
    return HalfPlane((be, 1.0), float(be * Y[0] + Y[1]))


def preimage_k_boundary(p: Params, x) -> np.ndarray:
    """Lower boundary y(x) of f^-1(K)."""
    Y = fixed_points(p).Y
    be = spectra(p).beta
    x = np.asarray(x, dtype=float)
    return (p.a * be * np.sign(x) - p.b) / be * x + Y[0] - 1.0 + Y[1] / be


@dataclass
class KRegionReport:
    preimage_contained: bool
    gamma: float
    G_in_K: bool
    delta_triangle: ConvexPolygon
    left_slope: float
    right_slope: float
    boundary_residual: float


def k_region_checks(p: Params, geom=None, samples: int = 2001, span: float = 50.0) -> KRegionReport:
    from .constructions import build_geometry
    geom = geom or build_geometry(p)
    K = k_region(p)
    sp = spectra(p)
    Y = geom.Y
    # points on the boundary of K, pulled back by f^-1
    s = np.linspace(-span, span, samples)
    bd = np.column_stack([Y[0] + s, Y[1] - sp.beta * s])
    pre = apply_inverse(p, bd)
    in_K = np.all(K.value(pre) >= -1e-9 * (1.0 + np.abs(pre).max(axis=1)))
    # compare the pulled-back points with the closed-form boundary
    resid = float(np.max(np.abs(pre[:, 1] - preimage_k_boundary(p, pre[:, 0]))
                         / (1.0 + np.abs(pre[:, 1]))))
    left = (-p.a * sp.beta - p.b) / sp.beta
    right = (p.a * sp.beta - p.b) / sp.beta
    c = Y[0] - 1.0 + Y[1] / sp.beta
    coincide = abs(left + sp.beta) < 1e-12 * (1 + sp.beta) and abs(c - (Y[1] + sp.beta * Y[0])) < 1e-12 * (1 + abs(c))
    contained = bool(in_K and coincide and right > 0 and resid < 1e-9)
    tri = ConvexPolygon([[(1.0 - c) / left, 1.0], [0.0, c], [(1.0 - c) / right, 1.0]])
    gamma = diameter(tri.vertices)
    G_in_K = bool(np.all(K.value(geom.G.vertices) >= -1e-12))
    return KRegionReport(contained, gamma, G_in_K, tri, left, right, resid)


@dataclass
class MeasureConstants:
    phi: float
    gamma: float
    delta: float
    area_G: float


def measure_bound_constants(p: Params, geom=None) -> MeasureConstants:
    """phi, gamma and delta = max(phi / (1 - 1/beta), gamma / (1 - alpha), m(G)).

    phi is taken as twice the vertical extent of G: a vertical strip of width
    2 nu alpha^n meets G in area at most that times nu alpha^n.
    """
    from .constructions import build_geometry
    geom = geom or build_geometry(p)
    sp = spectra(p)
    ys = geom.G.vertices[:, 1]
    phi = 2.0 * float(ys.max() - ys.min())
    gamma = k_region_checks(p, geom).gamma
    area = geom.G.area
    delta = max(phi / (1.0 - 1.0 / sp.beta), gamma / (1.0 - sp.alpha), area)
    return MeasureConstants(phi, gamma, delta, area)
