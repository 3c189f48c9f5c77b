"""Named points and regions built from the fixed points and their eigenlines.

The construction starts at Y, follows the unstable eigenline of Y to the
x-axis (point A), and uses its image B = f(A).  The stable eigenline of X cuts
the line AB at E; D = f^-1(E) lies on the other side of X on the same line.
H0 is the triangle ADE and G the triangle YAZ, where Z is the intersection of
the stable eigenline of Y with the line AB.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .core import (LoziError, Params, apply, apply_inverse, check_conditions,
                   fixed_points, spectra, substitute_r)
from .geometry import (ConvexPolygon, line_intersection, piecewise_affine_image,
                       point_segment_distance, uncovered_area)

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10


class ConstructionWarning(UserWarning):
    pass


@dataclass
class GeometryBundle:
    params: Params
    alpha: float
    beta: float
    X: np.ndarray
    Y: np.ndarray
    xi: np.ndarray
    A: np.ndarray
    B: np.ndarray
    M: np.ndarray
    fM: np.ndarray
    L: np.ndarray
    E: np.ndarray
    D: np.ndarray
    Z: np.ndarray
    H0: ConvexPolygon
    G: ConvexPolygon
    degenerate: bool = False
    warnings: List[str] = field(default_factory=list)

    POINTS = ("X", "Y", "xi", "A", "B", "M", "fM", "L", "E", "D", "Z")

    def to_dict(self) -> dict:
        out = {"a": self.params.a, "b": self.params.b,
               "alpha": self.alpha, "beta": self.beta}
        for k in self.POINTS:
            out[k] = [float(t) for t in getattr(self, k)]
        out["H0"] = self.H0.vertices.tolist()
        out["G"] = self.G.vertices.tolist()
        out["degenerate"] = bool(self.degenerate)
        out["warnings"] = list(self.warnings)
        return out

    def residuals(self) -> dict:
        p = self.params
        return {
            "f(A)-B": float(np.abs(apply(p, self.A) - self.B).max()),
            "f(M)-fM": float(np.abs(apply(p, self.M) - self.fM).max()),
            "f(xi)-A": float(np.abs(apply(p, self.xi) - self.A).max()),
            "f(D)-E": float(np.abs(apply(p, self.D) - self.E).max()),
            "f(X)-X": float(np.abs(apply(p, self.X) - self.X).max()),
            "f(Y)-Y": float(np.abs(apply(p, self.Y) - self.Y).max()),
        }

    @property
    def ED(self) -> np.ndarray:
        return np.array([self.E, self.D])


def build_geometry(p: Params, strict: bool = False) -> GeometryBundle:
    """Construct every named point and the triangles H0 and G.

    Outside C2 (for H0) or C3 (for Z and G) the construction still runs but
    records a warning; with ``strict=True`` it raises instead.
    """
    cond = check_conditions(p)
    warnings = []
    if not cond.c2:
        warnings.append("H0 not guaranteed for these parameters (C2 fails)")
    if not cond.c3:
        warnings.append("G not guaranteed for these parameters (C3 fails)")
    if warnings and strict:
        raise LoziError("; ".join(warnings))

    sp = spectra(p)
    al, be = sp.alpha, sp.beta
    fp = fixed_points(p)
    X, Y = fp.X, fp.Y
    b = p.b

    u_Y = np.array([be, b])   # unstable eigenvector at Y
    s_Y = np.array([al, b])   # stable eigenvector at Y
    s_X = np.array([-al, b])  # stable eigenvector at X

    xi = Y + (-Y[0] / be) * u_Y
    A = np.array([Y[0] * (1.0 - be), 0.0])
    B = apply(p, A)
    AB = B - A
    M = A + (A[0] / (A[0] - B[0])) * AB
    M[0] = 0.0
    fM = apply(p, M)
    L = np.array([X[0] * (1.0 + al), 0.0])
    E = line_intersection(X, s_X, A, AB)
    D = apply_inverse(p, E)
    Z = line_intersection(Y, s_Y, A, AB)

    degenerate = abs(fM[0] - L[0]) <= RESIDUAL_TOL
    H0 = ConvexPolygon([A, D, E])
    G = ConvexPolygon([Y, A, Z])
    for w in warnings:
        log.warning("(a, b) = (%g, %g): %s", p.a, p.b, w)
    return GeometryBundle(p, al, be, X, Y, xi, A, B, M, fM, L, E, D, Z, H0, G,
                          degenerate=degenerate, warnings=warnings)


def fM_minus_L_identity(a: float, r: float) -> float:
    """Closed form of f(M)_x - L_x after the substitution b = b_a(r)."""
    den = (2.0 - r) * (2.0 * a - r + 2.0) * (2.0 * a + r)
    if den == 0:
        raise LoziError("denominator vanishes")
    return 4.0 * a * (1.0 - r) * (2.0 * a - r) / den


def fM_minus_L_geometric(a: float, r: float) -> float:
    g = build_geometry(Params(a, substitute_r(a, r)))
    return float(g.fM[0] - g.L[0])


def b_above_stable_line_margin(p: Params) -> float:
    """(2b - a(beta - 2)) / (a + b - 1): positive iff B is above the stable line of Y."""
    den = p.a + p.b - 1.0
    if den == 0:
        raise LoziError("a + b - 1 = 0")
    be = spectra(p).beta
    return (2.0 * p.b - p.a * (be - 2.0)) / den


def stable_line_value(p: Params, z) -> float:
    """Left side of (y - Y_y)/beta + x - Y_x = 0 at ``z`` (the stable line of Y)."""
    Y = fixed_points(p).Y
    be = spectra(p).beta
    z = np.asarray(z, dtype=float)
    return float((z[1] - Y[1]) / be + z[0] - Y[0])


@dataclass
class InvarianceReport:
    contained: bool
    defect_area: float
    image_area: float


def verify_G_invariance(p: Params, geom: GeometryBundle = None,
                        tol: float = 1e-9) -> InvarianceReport:
    geom = geom or build_geometry(p)
    img = piecewise_affine_image(p, geom.G, "forward")
    defect = sum(uncovered_area(geom.G, piece) for piece in img.pieces)
    return InvarianceReport(contained=defect < tol, defect_area=float(defect),
                            image_area=img.area)


def verify_fM_in_H0(p: Params, geom: GeometryBundle = None,
                    tol: float = RESIDUAL_TOL) -> bool:
    """f(M) strictly inside H0 and X on the edge ED."""
    geom = geom or build_geometry(p)
    inside = geom.H0.contains(geom.fM, 0.0) and geom.H0.distance_to_boundary(geom.fM) > tol
    on_edge = point_segment_distance(geom.X, geom.E, geom.D) <= tol
    return bool(inside and on_edge)


def x_above_AB(geom: GeometryBundle) -> float:
    """Signed height of X over the line AB (positive means above)."""
    A, B, X = geom.A, geom.B, geom.X
    t = (X[0] - A[0]) / (B[0] - A[0])
    return float(X[1] - (A[1] + t * (B[1] - A[1])))
